//! Randomized tabletop scenes around an upward-facing camera.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

use super::pose::{facing_axis_rotation, HeadPose, LocalGaze};
use super::record::SampleRecord;
use super::rig::{project_annotation, FaceRig, DEFAULT_BBOX_MARGIN};
use super::DatasetError;
use crate::camera::CameraModel;

pub const MIN_PERSONS: usize = 1;
pub const MAX_PERSONS: usize = 7;

/// Inclusive `[lo, hi]` range in the unit of the field it belongs to.
pub type Range = (f64, f64);

/// Sampling ranges. Angles in degrees, lengths in cm.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub head_yaw: Range,
    pub head_pitch: Range,
    pub head_roll: Range,
    pub gaze_yaw: Range,
    pub gaze_pitch: Range,
    pub eyelid_closure: Range,
    pub distance_cm: Range,
    /// Elevation of the head center above the camera's horizon.
    pub elevation_deg: Range,
    /// Heads lower than this above the camera are lifted by raising elevation.
    pub min_head_height_cm: f64,
    pub bbox_margin: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            head_yaw: (-60.0, 60.0),
            head_pitch: (-35.0, 35.0),
            head_roll: (-5.0, 5.0),
            gaze_yaw: (-30.0, 30.0),
            gaze_pitch: (-30.0, 30.0),
            eyelid_closure: (0.0, 1.0),
            distance_cm: (30.0, 120.0),
            elevation_deg: (20.0, 65.0),
            min_head_height_cm: 20.0,
            bbox_margin: DEFAULT_BBOX_MARGIN,
        }
    }
}

/// Where a head sits relative to the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance_cm: f64,
}

impl Placement {
    pub fn translation_cm(&self) -> [f64; 3] {
        let (sa, ca) = self.azimuth_deg.to_radians().sin_cos();
        let (se, ce) = self.elevation_deg.to_radians().sin_cos();
        let d = self.distance_cm;
        [d * ce * ca, d * ce * sa, d * se]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenePerson {
    pub head_pose: HeadPose,
    pub gaze: LocalGaze,
    pub placement: Placement,
    pub eyelid_closure: f64,
}

/// RNG for image `index` of a run seeded with `seed`; each index gets its own stream.
pub fn scene_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform(rng: &mut impl Rng, (lo, hi): Range) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws `n_persons` people spread around the ring.
///
/// Azimuths are evenly spaced from a random offset with jitter of a quarter
/// of the spacing, so neighbours do not overlap.
pub fn sample_scene(
    rng: &mut impl Rng,
    n_persons: usize,
    config: &SceneConfig,
) -> Result<Vec<ScenePerson>, DatasetError> {
    if !(MIN_PERSONS..=MAX_PERSONS).contains(&n_persons) {
        return Err(DatasetError::PersonCount(n_persons));
    }
    let spacing = 360.0 / n_persons as f64;
    let offset = rng.random_range(0.0..360.0);
    (0..n_persons)
        .map(|i| {
            let jitter = uniform(rng, (-0.25 * spacing, 0.25 * spacing));
            let azimuth_deg = (offset + i as f64 * spacing + jitter).rem_euclid(360.0);
            let distance_cm = uniform(rng, config.distance_cm);
            let lift = (config.min_head_height_cm / distance_cm).clamp(-1.0, 1.0).asin().to_degrees();
            let (elo, ehi) = config.elevation_deg;
            let elevation_deg = uniform(rng, (elo.max(lift).min(ehi), ehi));
            let placement = Placement { azimuth_deg, elevation_deg, distance_cm };
            let head_pose = HeadPose {
                yaw_deg: uniform(rng, config.head_yaw),
                pitch_deg: uniform(rng, config.head_pitch),
                roll_deg: uniform(rng, config.head_roll),
                translation_cm: placement.translation_cm(),
            };
            let gaze = LocalGaze { yaw_deg: uniform(rng, config.gaze_yaw), pitch_deg: uniform(rng, config.gaze_pitch) };
            Ok(ScenePerson { head_pose, gaze, placement, eyelid_closure: uniform(rng, config.eyelid_closure) })
        })
        .collect()
}

/// [`sample_scene`] with a fresh RNG for `(seed, 0)`.
pub fn sample_scene_seeded(seed: u64, n_persons: usize, config: &SceneConfig) -> Result<Vec<ScenePerson>, DatasetError> {
    sample_scene(&mut scene_rng(seed, 0), n_persons, config)
}

/// Samples and annotates image `index` of a seeded run (1 to 7 people).
pub fn generate_record(
    seed: u64,
    index: u64,
    camera: &CameraModel,
    rig: &FaceRig,
    config: &SceneConfig,
) -> Result<SampleRecord, DatasetError> {
    let mut rng = scene_rng(seed, index);
    let n = rng.random_range(MIN_PERSONS..=MAX_PERSONS);
    let people = sample_scene(&mut rng, n, config)?;
    let persons = people
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let geo = rig.place(
                i as u32,
                &p.head_pose,
                &p.gaze,
                &facing_axis_rotation(p.placement.azimuth_deg),
                p.eyelid_closure,
            );
            project_annotation(&geo, camera, config.bbox_margin).map(|pp| pp.annotation)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampleRecord { image: format!("frame_{index:06}.png"), camera: camera.clone(), persons, extra: Map::new() })
}
