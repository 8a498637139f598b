use std::collections::VecDeque;

use super::CannyParams;
use crate::image::{EdgeMap, GrayImage};

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(image: &GrayImage, sigma: f64) -> GrayImage {
    if sigma <= 0.0 {
        return image.clone();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = (image.width() as isize, image.height() as isize);
    let mut tmp = GrayImage::new(w as usize, h as usize, 0.0);
    for y in 0..h {
        for x in 0..w {
            let v: f64 = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * image.get((x + i as isize - r).clamp(0, w - 1) as usize, y as usize))
                .sum();
            tmp.set(x as usize, y as usize, v);
        }
    }
    let mut out = GrayImage::new(w as usize, h as usize, 0.0);
    for y in 0..h {
        for x in 0..w {
            let v: f64 = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * tmp.get(x as usize, (y + i as isize - r).clamp(0, h - 1) as usize))
                .sum();
            out.set(x as usize, y as usize, v);
        }
    }
    out
}

/// Canny edges: Gaussian smoothing, Sobel gradients, 4-direction non-maximum
/// suppression and double-threshold hysteresis over 8-connected pixels.
pub fn canny(image: &GrayImage, params: &CannyParams) -> EdgeMap {
    let (w, h) = (image.width(), image.height());
    let mut edges = EdgeMap::new(w, h);
    if w < 5 || h < 5 {
        return edges;
    }
    let smooth = gaussian_blur(image, params.sigma);

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| smooth.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = y * w + x;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = (sx * sx + sy * sy).sqrt();
        }
    }

    // suppressed magnitude; ties keep the pixel on the negative side of the gradient
    let mut nms = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let angle = gy[i].atan2(gx[i]).to_degrees();
            let a = if angle < 0.0 { angle + 180.0 } else { angle };
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&a) {
                (1, 0)
            } else if a < 67.5 {
                (1, 1)
            } else if a < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let at = |sx: isize, sy: isize| mag[((y as isize + sy) as usize) * w + (x as isize + sx) as usize];
            if m > at(-dx, -dy) && m >= at(dx, dy) {
                nms[i] = m;
            }
        }
    }

    let mut queue = VecDeque::new();
    for (i, &m) in nms.iter().enumerate() {
        if m >= params.high_threshold {
            edges.set(i % w, i / w, true);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if nms[j] >= params.low_threshold && !edges.get(nx as usize, ny as usize) {
                    edges.set(nx as usize, ny as usize, true);
                    queue.push_back(j);
                }
            }
        }
    }
    edges
}
