//! Brute-force reference implementations used by the test suites.
//!
//! These share nothing with the library beyond plain data: flat `Vec<f64>`
//! buffers in row-major order and explicit loops.

#![allow(dead_code, clippy::too_many_arguments)]

use std::collections::HashSet;

/// Cross-correlation, input `h x w x cin`, kernel `cout x cin x k x k`.
pub fn conv(x: &[f64], h: usize, w: usize, cin: usize, kern: &[f64], cout: usize, k: usize, stride: usize, pad: usize) -> (Vec<f64>, usize, usize) {
    let ho = (h + 2 * pad - k) / stride + 1;
    let wo = (w + 2 * pad - k) / stride + 1;
    let mut out = vec![0.0; ho * wo * cout];
    for oy in 0..ho {
        for ox in 0..wo {
            for co in 0..cout {
                let mut s = 0.0;
                for ky in 0..k {
                    for kx in 0..k {
                        let iy = (oy * stride + ky) as i64 - pad as i64;
                        let ix = (ox * stride + kx) as i64 - pad as i64;
                        if iy < 0 || ix < 0 || iy >= h as i64 || ix >= w as i64 {
                            continue;
                        }
                        for ci in 0..cin {
                            s += x[(iy as usize * w + ix as usize) * cin + ci] * kern[((co * cin + ci) * k + ky) * k + kx];
                        }
                    }
                }
                out[(oy * wo + ox) * cout + co] = s;
            }
        }
    }
    (out, ho, wo)
}

/// Kernel taps rotated `r` quarter turns counter-clockwise, written out per case.
pub fn rotate_kernel(kern: &[f64], cout: usize, cin: usize, k: usize, r: usize) -> Vec<f64> {
    let mut out = vec![0.0; kern.len()];
    for o in 0..cout {
        for i in 0..cin {
            for y in 0..k {
                for x in 0..k {
                    let (sy, sx) = match r % 4 {
                        0 => (y, x),
                        1 => (x, k - 1 - y),
                        2 => (k - 1 - y, k - 1 - x),
                        _ => (k - 1 - x, y),
                    };
                    out[((o * cin + i) * k + y) * k + x] = kern[((o * cin + i) * k + sy) * k + sx];
                }
            }
        }
    }
    out
}

/// `h x w x c` map rotated one quarter turn counter-clockwise (`w x h x c`).
pub fn rotate_map(x: &[f64], h: usize, w: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for y in 0..w {
        for xx in 0..h {
            for ch in 0..c {
                out[(y * h + xx) * c + ch] = x[(xx * w + (w - 1 - y)) * c + ch];
            }
        }
    }
    out
}

pub fn rot_conv(x: &[f64], h: usize, w: usize, cin: usize, kern: &[f64], cout: usize, k: usize, weights: [f64; 4], stride: usize, pad: usize) -> Vec<f64> {
    let mut acc: Option<Vec<f64>> = None;
    for (r, wr) in weights.iter().enumerate() {
        let (y, _, _) = conv(x, h, w, cin, &rotate_kernel(kern, cout, cin, k, r), cout, k, stride, pad);
        let a = acc.get_or_insert_with(|| vec![0.0; y.len()]);
        for (a, v) in a.iter_mut().zip(y) {
            *a += wr * v;
        }
    }
    acc.unwrap()
}

/// `rot_conv(rot90(x))` built from the responses on the unrotated input:
/// `conv(rot x, rot^r k) = rot(conv(x, rot^(r-1) k))`, so the weights shift by one.
pub fn rot_conv_of_rotated(x: &[f64], n: usize, cin: usize, kern: &[f64], cout: usize, k: usize, weights: [f64; 4]) -> Vec<f64> {
    let pad = (k - 1) / 2;
    let shifted = [weights[1], weights[2], weights[3], weights[0]];
    let y = rot_conv(x, n, n, cin, kern, cout, k, shifted, 1, pad);
    rotate_map(&y, n, n, cout)
}

pub fn avg_pool(x: &[f64], n: usize, h: usize, w: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * c];
    for f in 0..n {
        for ch in 0..c {
            let mut s = 0.0;
            for i in 0..h {
                for j in 0..w {
                    s += x[((f * h + i) * w + j) * c + ch];
                }
            }
            out[f * c + ch] = s / (h * w) as f64;
        }
    }
    out
}

/// `x (m x a) * w (a x b) + bias`.
pub fn linear(x: &[f64], m: usize, a: usize, w: &[f64], b: usize, bias: Option<&[f64]>) -> Vec<f64> {
    let mut out = vec![0.0; m * b];
    for i in 0..m {
        for j in 0..b {
            let mut s = 0.0;
            for t in 0..a {
                s += x[i * a + t] * w[t * b + j];
            }
            out[i * b + j] = s + bias.map_or(0.0, |bb| bb[j]);
        }
    }
    out
}

/// Attention weights by exponentiate-and-normalize, no shifting.
pub fn attention_weights(q: &[f64], m: usize, kk: &[f64], n: usize, dk: usize) -> Vec<f64> {
    let mut a = vec![0.0; m * n];
    for i in 0..m {
        let mut z = 0.0;
        for j in 0..n {
            let mut dot = 0.0;
            for t in 0..dk {
                dot += q[i * dk + t] * kk[j * dk + t];
            }
            let e = (dot / (dk as f64).sqrt()).exp();
            a[i * n + j] = e;
            z += e;
        }
        for j in 0..n {
            a[i * n + j] /= z;
        }
    }
    a
}

pub fn attention(q: &[f64], m: usize, kk: &[f64], v: &[f64], n: usize, dk: usize, c: usize) -> Vec<f64> {
    let a = attention_weights(q, m, kk, n, dk);
    let mut out = vec![0.0; m * c];
    for i in 0..m {
        for ch in 0..c {
            for j in 0..n {
                out[i * c + ch] += a[i * n + j] * v[j * c + ch];
            }
        }
    }
    out
}

/// Row channels first (`ceil(c/2)`), then column channels.
pub fn sinusoidal_pe(h: usize, w: usize, c: usize) -> Vec<f64> {
    let mr = c.div_ceil(2);
    let mc = c - mr;
    let mut out = Vec::with_capacity(h * w * c);
    for i in 0..h {
        for j in 0..w {
            for ch in 0..c {
                let (pos, k, m) = if ch < mr { (i, ch, mr) } else { (j, ch - mr, mc) };
                let angle = pos as f64 / 10000f64.powf((2 * (k / 2)) as f64 / m as f64);
                out.push(if k % 2 == 0 { angle.sin() } else { angle.cos() });
            }
        }
    }
    out
}

/// Cells covered at least half by the scaled box, plus the cell under its center.
pub fn mask(boxes: &[[f64; 4]], img_w: f64, img_h: f64, gh: usize, gw: usize) -> Vec<f64> {
    let mut out = vec![0.0; boxes.len() * gh * gw];
    for (n, b) in boxes.iter().enumerate() {
        let (x0, x1) = (b[0] * gw as f64 / img_w, (b[0] + b[2]) * gw as f64 / img_w);
        let (y0, y1) = (b[1] * gh as f64 / img_h, (b[1] + b[3]) * gh as f64 / img_h);
        for i in 0..gh {
            for j in 0..gw {
                let ox = (x1.min(j as f64 + 1.0) - x0.max(j as f64)).max(0.0);
                let oy = (y1.min(i as f64 + 1.0) - y0.max(i as f64)).max(0.0);
                let cx = (x0 + x1) / 2.0;
                let cy = (y0 + y1) / 2.0;
                let center_here = (cx.floor().max(0.0) as usize).min(gw - 1) == j && (cy.floor().max(0.0) as usize).min(gh - 1) == i;
                if ox * oy >= 0.5 || center_here {
                    out[(n * gh + i) * gw + j] = 1.0;
                }
            }
        }
    }
    out
}

pub struct FuseInstance {
    pub h: usize,
    pub w: usize,
    pub c_l: usize,
    pub c_h: usize,
    pub d_k: usize,
    pub n: usize,
    pub features: Vec<f64>,
    pub pe: Vec<f64>,
    pub pooled: Vec<f64>,
    pub w_q: Vec<f64>,
    pub w_k: Vec<f64>,
    pub b_k: Vec<f64>,
    pub w_v: Vec<f64>,
    pub masks: Vec<f64>,
}

/// `F + M * Attention(W_Q(F + P), W_K(pooled), W_V(pooled))`, masks merged by max.
pub fn fuse(s: &FuseInstance) -> Vec<f64> {
    let hw = s.h * s.w;
    let seq: Vec<f64> = s.features.iter().zip(&s.pe).map(|(a, b)| a + b).collect();
    let q = linear(&seq, hw, s.c_l, &s.w_q, s.d_k, None);
    let k = linear(&s.pooled, s.n, s.c_h, &s.w_k, s.d_k, Some(&s.b_k));
    let v = linear(&s.pooled, s.n, s.c_h, &s.w_v, s.c_l, None);
    let att = attention(&q, hw, &k, &v, s.n, s.d_k, s.c_l);
    let mut out = s.features.clone();
    for pos in 0..hw {
        let m = (0..s.n).map(|f| s.masks[f * hw + pos]).fold(0.0, f64::max);
        for ch in 0..s.c_l {
            out[pos * s.c_l + ch] += m * att[pos * s.c_l + ch];
        }
    }
    out
}

pub fn smooth_l1(p: &[f64], t: &[f64], beta: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let d = (p[i] - t[i]).abs();
        s += if d < beta { 0.5 * d * d / beta } else { d - 0.5 * beta };
    }
    s / p.len() as f64
}

/// Positives and negatives averaged separately with `-ln(sigmoid)`.
pub fn balanced_bce(x: &[f64], y: &[f64]) -> f64 {
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let pos: Vec<f64> = x.iter().zip(y).filter(|(_, l)| **l == 1.0).map(|(v, _)| -sig(*v).ln()).collect();
    let neg: Vec<f64> = x.iter().zip(y).filter(|(_, l)| **l == 0.0).map(|(v, _)| -(1.0 - sig(*v)).ln()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    match (pos.is_empty(), neg.is_empty()) {
        (false, false) => 0.5 * mean(&pos) + 0.5 * mean(&neg),
        (true, false) => mean(&neg),
        (false, true) => mean(&pos),
        (true, true) => 0.0,
    }
}

/// Largest number of (gt, pred) pairs with IoU at least `thr`, by trying every assignment.
pub fn optimal_matches(iou: &[Vec<f64>], thr: f64) -> usize {
    fn go(iou: &[Vec<f64>], thr: f64, g: usize, used: &mut Vec<bool>) -> usize {
        if g == iou.len() {
            return 0;
        }
        let mut best = go(iou, thr, g + 1, used);
        for p in 0..used.len() {
            if !used[p] && iou[g][p] >= thr {
                used[p] = true;
                best = best.max(1 + go(iou, thr, g + 1, used));
                used[p] = false;
            }
        }
        best
    }
    let n_pred = iou.first().map_or(0, |r| r.len());
    go(iou, thr, 0, &mut vec![false; n_pred])
}

pub fn iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let ix = ((a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0])).max(0.0);
    let iy = ((a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1])).max(0.0);
    let inter = ix * iy;
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union > 0.0 { inter / union } else { 0.0 }
}

/// Per-bin means over `[lo, hi)` for consecutive edges; `None` for empty bins.
pub fn bin_means(samples: &[(f64, f64)], edges: &[f64]) -> Vec<(usize, Option<f64>)> {
    (0..edges.len() - 1)
        .map(|b| {
            let vals: Vec<f64> = samples.iter().filter(|(k, _)| *k >= edges[b] && *k < edges[b + 1]).map(|(_, e)| *e).collect();
            let n = vals.len();
            (n, (n > 0).then(|| vals.iter().sum::<f64>() / n as f64))
        })
        .collect()
}

/// Mean error of each method over the keys present in all of them.
pub fn adjusted(methods: &[Vec<((String, u32), f64)>]) -> Vec<f64> {
    let mut common: HashSet<(String, u32)> = methods[0].iter().map(|(k, _)| k.clone()).collect();
    for m in &methods[1..] {
        let keys: HashSet<_> = m.iter().map(|(k, _)| k.clone()).collect();
        common.retain(|k| keys.contains(k));
    }
    methods
        .iter()
        .map(|m| {
            let v: Vec<f64> = m.iter().filter(|(k, _)| common.contains(k)).map(|(_, e)| *e).collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect()
}

/// Equidistant projection for a camera looking along `+z`, written from scratch.
pub fn equidistant_project(d: [f64; 3], f: f64, cx: f64, cy: f64, half_fov: f64) -> Option<[f64; 2]> {
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let theta = ((d[0] * d[0] + d[1] * d[1]).sqrt()).atan2(d[2]);
    if theta > half_fov + 1e-12 {
        return None;
    }
    let rho = (d[0] * d[0] + d[1] * d[1]).sqrt() / n;
    if rho == 0.0 {
        return Some([cx, cy]);
    }
    let r = f * theta;
    Some([cx + r * d[0] / n / rho, cy + r * d[1] / n / rho])
}

pub fn equidistant_unproject(u: f64, v: f64, f: f64, cx: f64, cy: f64, half_fov: f64) -> Option<[f64; 3]> {
    let (dx, dy) = (u - cx, v - cy);
    let r = dx.hypot(dy);
    let theta = r / f;
    if theta > half_fov {
        return None;
    }
    if r == 0.0 {
        return Some([0.0, 0.0, 1.0]);
    }
    Some([theta.sin() * dx / r, theta.sin() * dy / r, theta.cos()])
}
