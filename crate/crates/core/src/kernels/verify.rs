//! Replays the checks of a golden bundle.

use serde::Serialize;
use serde_json::Value;

use super::io::{Bundle, BundleCheck};
use super::*;
use crate::dataset::BBox;

pub const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub op: String,
    /// Largest deviation over all expected outputs; infinite on a shape mismatch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Ctx<'a> {
    bundle: &'a Bundle,
    check: &'a BundleCheck,
}

impl Ctx<'_> {
    fn input(&self, arg: &str) -> Result<&Tensor, String> {
        self.maybe_input(arg)?.ok_or_else(|| format!("missing input {arg:?}"))
    }

    fn maybe_input(&self, arg: &str) -> Result<Option<&Tensor>, String> {
        match self.check.inputs.get(arg) {
            None => Ok(None),
            Some(name) => self.bundle.tensors.get(name).map(Some).ok_or_else(|| format!("unknown tensor {name:?}")),
        }
    }

    fn param(&self, key: &str) -> Option<&Value> {
        self.check.params.get(key)
    }

    fn usize(&self, key: &str, default: Option<usize>) -> Result<usize, String> {
        match self.param(key) {
            Some(v) => v.as_u64().map(|v| v as usize).ok_or_else(|| format!("param {key:?} must be an integer")),
            None => default.ok_or_else(|| format!("missing param {key:?}")),
        }
    }

    fn f64(&self, key: &str, default: Option<f64>) -> Result<f64, String> {
        match self.param(key) {
            Some(v) => v.as_f64().ok_or_else(|| format!("param {key:?} must be a number")),
            None => default.ok_or_else(|| format!("missing param {key:?}")),
        }
    }

    fn f64s<const N: usize>(&self, key: &str, default: [f64; N]) -> Result<[f64; N], String> {
        match self.param(key) {
            None => Ok(default),
            Some(v) => serde_json::from_value::<Vec<f64>>(v.clone())
                .ok()
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| format!("param {key:?} must be {N} numbers")),
        }
    }

    fn linear(&self, w: &str, b: &str) -> Result<Linear, String> {
        Linear::new(self.input(w)?.clone(), self.maybe_input(b)?.cloned()).map_err(|e| e.to_string())
    }

    fn fusion_weights(&self, suffix: &str) -> Result<FusionWeights, String> {
        let name = |base: &str| format!("{base}{suffix}");
        let features = self.input(&name("features"))?;
        let pe = match self.maybe_input(&name("pe"))? {
            Some(p) => p.clone(),
            None => match features.shape() {
                &[h, w, c] => sinusoidal_pe(h, w, c),
                s => return Err(format!("features must be H x W x C, got {s:?}")),
            },
        };
        FusionWeights::new(
            self.linear(&name("w_q"), &name("b_q"))?,
            self.linear(&name("w_k"), &name("b_k"))?,
            self.linear(&name("w_v"), &name("b_v"))?,
            pe,
        )
        .map_err(|e| e.to_string())
    }

    fn scale(&self, suffix: &str) -> Result<ScaleInput, String> {
        Ok(ScaleInput {
            features: self.input(&format!("features{suffix}"))?.clone(),
            weights: self.fusion_weights(suffix)?,
            mask: SpatialMask::new(self.input(&format!("mask{suffix}"))?.clone()).map_err(|e| e.to_string())?,
        })
    }

    fn multitask(&self, prefix: &str) -> Result<MultiTaskOutput, String> {
        let t = |head: &str| self.input(&format!("{prefix}_{head}")).cloned();
        Ok(MultiTaskOutput {
            y_c: t("y_c")?,
            y_b: t("y_b")?,
            y_d: t("y_d")?,
            y_h: t("y_h")?,
            y_g: t("y_g")?,
            y_fl: t("y_fl")?,
            y_el: t("y_el")?,
        })
    }
}

fn run(ctx: &Ctx) -> Result<Vec<Tensor>, String> {
    let err = |e: KernelError| e.to_string();
    let one = |t: Result<Tensor, KernelError>| t.map(|t| vec![t]).map_err(err);
    match ctx.check.op.as_str() {
        "conv2d" => one(conv2d(ctx.input("input")?, ctx.input("weight")?, ctx.usize("stride", Some(1))?, ctx.usize("padding", Some(0))?)),
        "rot_conv_forward" => {
            let base = ctx.input("weight")?.clone();
            let kernel = RotConvKernel::new(base, ctx.f64s("rotation_weights", [0.25; 4])?).map_err(err)?;
            let padding = ctx.usize("padding", Some(kernel.same_padding()))?;
            one(rot_conv_forward(ctx.input("input")?, &kernel, ctx.usize("stride", Some(1))?, padding))
        }
        "global_avg_pool" => one(global_avg_pool(ctx.input("input")?)),
        "flatten_with_pe" => one(flatten_with_pe(ctx.input("features")?, ctx.input("pe")?)),
        "sinusoidal_pe" => Ok(vec![sinusoidal_pe(ctx.usize("h", None)?, ctx.usize("w", None)?, ctx.usize("c", None)?)]),
        "attention_weights" => one(attention_weights(ctx.input("q")?, ctx.input("k")?)),
        "cross_attention" => one(cross_attention(ctx.input("q")?, ctx.input("k")?, ctx.input("v")?)),
        "spatial_mask" => {
            let boxes = ctx.input("boxes")?;
            let &[_, 4] = boxes.shape() else { return Err(format!("boxes must be N x 4, got {:?}", boxes.shape())) };
            let boxes: Vec<BBox> = boxes.data().chunks(4).map(|b| BBox::new(b[0], b[1], b[2], b[3])).collect();
            let m = SpatialMask::from_bboxes(
                &boxes,
                ctx.f64("image_w", None)?,
                ctx.f64("image_h", None)?,
                ctx.usize("grid_h", None)?,
                ctx.usize("grid_w", None)?,
            );
            Ok(vec![m.tensor().clone()])
        }
        "fuse_scale" => {
            let s = ctx.scale("")?;
            one(fuse_scale(&s.features, ctx.input("pooled")?, &s.weights, &s.mask))
        }
        "multi_scale_fuse" => {
            let scales = (1..=FUSION_SCALES).map(|i| ctx.scale(&format!("_{i}"))).collect::<Result<Vec<_>, _>>()?;
            multi_scale_fuse(&scales, ctx.input("pooled")?).map_err(err)
        }
        "smooth_l1" => {
            let v = smooth_l1(ctx.input("pred")?.data(), ctx.input("target")?.data(), ctx.f64("beta", Some(DEFAULT_SMOOTH_L1_BETA))?);
            Ok(vec![Tensor::scalar(v.map_err(err)?)])
        }
        "balanced_bce" => Ok(vec![Tensor::scalar(balanced_bce(ctx.input("logits")?.data(), ctx.input("labels")?.data()).map_err(err)?)]),
        "total_loss" => {
            let b = total_loss(
                &ctx.multitask("out")?,
                &ctx.multitask("target")?,
                ctx.f64s("lambdas", [1.0; 7])?,
                ctx.f64("beta", Some(DEFAULT_SMOOTH_L1_BETA))?,
            )
            .map_err(err)?;
            let mut v = b.terms.to_vec();
            v.push(b.total);
            Ok(vec![Tensor::new(vec![8], v).map_err(err)?])
        }
        other => Err(format!("unknown op {other:?}")),
    }
}

fn run_check(bundle: &Bundle, check: &BundleCheck, tolerance: f64) -> CheckOutcome {
    let mut outcome =
        CheckOutcome { name: check.name.clone(), op: check.op.clone(), max_abs_deviation: None, error: None, passed: false };
    let expected: Result<Vec<&Tensor>, String> = check
        .expected
        .as_slice()
        .iter()
        .map(|n| bundle.tensors.get(n).ok_or_else(|| format!("unknown tensor {n:?}")))
        .collect();
    let result = expected.and_then(|exp| Ok((exp, run(&Ctx { bundle, check })?)));
    match result {
        Err(e) => outcome.error = Some(e),
        Ok((exp, got)) if exp.len() != got.len() => {
            outcome.error = Some(format!("op produced {} outputs, {} expected", got.len(), exp.len()));
        }
        Ok((exp, got)) => {
            let dev = exp
                .iter()
                .zip(&got)
                .map(|(e, g)| g.max_abs_diff(e).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            outcome.max_abs_deviation = Some(dev);
            outcome.passed = dev <= tolerance;
            if dev.is_infinite() {
                outcome.error = Some("output shape differs from expected".into());
            }
        }
    }
    outcome
}

/// Runs every check in `bundle`; a check passes when each output is within
/// `tolerance` of its stored expectation.
pub fn verify_bundle(bundle: &Bundle, tolerance: f64) -> VerifyReport {
    let checks = bundle.index.checks.iter().map(|c| run_check(bundle, c, tolerance)).collect();
    VerifyReport { tolerance, checks }
}
