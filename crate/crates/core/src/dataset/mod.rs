//! Synthetic ground-truth annotations in the fisheye camera frame.
//!
//! Scenes are sampled ([`scene`]), a canonical face rig is posed in 3D
//! ([`rig`]), projected through a camera model into 2D labels, and checked
//! for compliance ([`validate`]). Records keep both the 3D sources and the
//! derived 2D labels, so [`remap`] can re-target another camera exactly.

pub mod arrow;
pub mod pose;
pub mod record;
pub mod remap;
pub mod rig;
pub mod scene;
pub mod validate;

pub use arrow::{arrow_anchor, arrow_polyline, ArrowAnchor, ARROW_SAMPLES, DEFAULT_ARROW_LENGTH_CM};
pub use pose::{gaze_local_to_camera, head_forward, head_rotation_matrix, HeadPose, LocalGaze};
pub use record::{read_manifest, write_manifest, BBox, EyeLandmarks, PersonAnnotation, SampleRecord};
pub use remap::{remap_annotations, FlaggedLandmark, RemapOutcome};
pub use rig::{project_annotation, FaceRig, PersonGeometry, ProjectedPerson, DEFAULT_BBOX_MARGIN};
pub use scene::{generate_record, sample_scene, sample_scene_seeded, scene_rng, Placement, SceneConfig, ScenePerson};
pub use validate::{validate_line, validate_record, validate_record_with, Violation, ViolationKind};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("every facial landmark of person {person_id} is outside the field of view")]
    FaceOutOfFov { person_id: u32 },
    #[error("person count {0} outside [1, 7]")]
    PersonCount(usize),
    #[error("parse error{}: {message}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
