use image::{Rgb, RgbImage};

/// Bilinear sample at continuous pixel coordinate `(u, v)`, pixel centers at
/// integer + 0.5. Coordinates outside the image clamp to the edge pixels.
pub fn sample_bilinear_f64(image: &RgbImage, u: f64, v: f64) -> [f64; 3] {
    let (w, h) = image.dimensions();
    let x = (u - 0.5).clamp(0.0, (w - 1) as f64);
    let y = (v - 0.5).clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;

    let p00 = image.get_pixel(x0, y0).0;
    let p10 = image.get_pixel(x1, y0).0;
    let p01 = image.get_pixel(x0, y1).0;
    let p11 = image.get_pixel(x1, y1).0;
    std::array::from_fn(|c| {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// [`sample_bilinear_f64`] rounded to 8 bits per channel.
pub fn sample_bilinear(image: &RgbImage, u: f64, v: f64) -> Rgb<u8> {
    Rgb(sample_bilinear_f64(image, u, v).map(round_channel))
}

/// Round-half-to-even into `0..=255`.
pub fn round_channel(value: f64) -> u8 {
    value.round_ties_even().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> RgbImage {
        RgbImage::from_fn(7, 5, |x, y| Rgb([(x * 30) as u8, (y * 50) as u8, ((x * y * 7) % 256) as u8]))
    }

    #[test]
    fn pixel_centers_are_exact() {
        let img = ramp();
        for (x, y, p) in img.enumerate_pixels() {
            assert_eq!(sample_bilinear(&img, x as f64 + 0.5, y as f64 + 0.5), *p);
        }
    }

    #[test]
    fn midpoint_rounds_half_to_even() {
        let img = RgbImage::from_fn(2, 1, |x, _| if x == 0 { Rgb([0, 0, 0]) } else { Rgb([255, 255, 255]) });
        assert_eq!(sample_bilinear_f64(&img, 1.0, 0.5), [127.5; 3]);
        assert_eq!(sample_bilinear(&img, 1.0, 0.5), Rgb([128; 3]));
        assert_eq!(round_channel(126.5), 126);
    }

    #[test]
    fn clamps_outside() {
        let img = ramp();
        assert_eq!(sample_bilinear(&img, -10.0, -3.0), *img.get_pixel(0, 0));
        assert_eq!(sample_bilinear(&img, 100.0, 100.0), *img.get_pixel(6, 4));
    }

    // independent scalar bilinear: weights over the four neighbours by distance
    fn scalar_oracle(img: &RgbImage, u: f64, v: f64, c: usize) -> f64 {
        let (w, h) = img.dimensions();
        let x = (u - 0.5).max(0.0).min(w as f64 - 1.0);
        let y = (v - 0.5).max(0.0).min(h as f64 - 1.0);
        let mut acc = 0.0;
        for j in 0..h {
            for i in 0..w {
                let wx = (1.0 - (x - i as f64).abs()).max(0.0);
                let wy = (1.0 - (y - j as f64).abs()).max(0.0);
                acc += wx * wy * img.get_pixel(i, j).0[c] as f64;
            }
        }
        acc
    }

    proptest! {
        #[test]
        fn matches_scalar_oracle(u in -1.0f64..8.0, v in -1.0f64..6.0) {
            let img = ramp();
            let got = sample_bilinear(&img, u, v);
            for c in 0..3 {
                let want = scalar_oracle(&img, u, v, c);
                prop_assert!((got.0[c] as f64 - want).abs() <= 1.0);
            }
        }
    }
}
