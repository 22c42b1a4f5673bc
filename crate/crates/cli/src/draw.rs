use image::{Rgb, RgbImage};

fn put(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u64) < img.width() as u64 && (y as u64) < img.height() as u64 {
        img.put_pixel(x as u32, y as u32, color);
    }
}

/// Bresenham segment, clipped to the image; `thickness` widens it into a square brush.
pub fn line(img: &mut RgbImage, (x0, y0): (f64, f64), (x1, y1): (f64, f64), color: Rgb<u8>, thickness: u32) {
    let (mut x, mut y) = (x0.floor() as i64, y0.floor() as i64);
    let (xe, ye) = (x1.floor() as i64, y1.floor() as i64);
    let dx = (xe - x).abs();
    let dy = -(ye - y).abs();
    let sx = if x < xe { 1 } else { -1 };
    let sy = if y < ye { 1 } else { -1 };
    let mut err = dx + dy;
    let r = thickness.saturating_sub(1) as i64 / 2;
    let r_hi = thickness.saturating_sub(1) as i64 - r;
    loop {
        for oy in -r..=r_hi {
            for ox in -r..=r_hi {
                put(img, x + ox, y + oy, color);
            }
        }
        if x == xe && y == ye {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

pub fn rect(img: &mut RgbImage, x: f64, y: f64, w: f64, h: f64, color: Rgb<u8>, thickness: u32) {
    let corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
    for i in 0..4 {
        line(img, corners[i], corners[(i + 1) % 4], color, thickness);
    }
}

/// Joins consecutive visible vertices; a missing vertex breaks the line.
pub fn polyline(img: &mut RgbImage, points: &[Option<(f64, f64)>], color: Rgb<u8>, thickness: u32) {
    for pair in points.windows(2) {
        if let [Some(a), Some(b)] = pair {
            line(img, *a, *b, color, thickness);
        }
    }
}
