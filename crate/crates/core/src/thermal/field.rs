use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::image::{EdgeMap, GrayImage};

/// Euclidean distance (pixels) from each pixel centre to the nearest edge pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractionField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// Squared 1-D distance transform of `f`, skipping infinite entries so the
/// lower envelope only ever intersects finite parabolas.
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let Some(&p) = v.last() else { break };
            let pf = p as f64;
            let s = ((fq + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            v.push(q);
            z.push(f64::NEG_INFINITY);
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < v.len() && z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

pub fn build_attraction_field(edges: &EdgeMap) -> Result<AttractionField> {
    if edges.is_empty() {
        return Err(Error::EmptyEdges);
    }
    let (w, h) = (edges.width(), edges.height());
    let mut sq = vec![f64::INFINITY; w * h];
    let (mut v, mut z) = (Vec::new(), Vec::new());

    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = if edges.get(x, y) { 0.0 } else { f64::INFINITY };
        }
        dt_1d(&col, &mut col_out, &mut v, &mut z);
        for y in 0..h {
            sq[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0.0; w];
    for y in 0..h {
        dt_1d(&sq[y * w..(y + 1) * w], &mut row_out, &mut v, &mut z);
        sq[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }
    Ok(AttractionField {
        width: w,
        height: h,
        data: sq.into_iter().map(f64::sqrt).collect(),
    })
}

impl AttractionField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Whether bilinear sampling (and the gradient stencil) is defined at `u`.
    pub fn in_domain(&self, u: &Vec2) -> bool {
        u.x >= 1.0 && u.y >= 1.0 && u.x <= (self.width - 2) as f64 && u.y <= (self.height - 2) as f64
    }

    fn cell(&self, u: &Vec2) -> Result<(usize, usize, f64, f64)> {
        if self.width < 4 || self.height < 4 || !self.in_domain(u) {
            return Err(Error::OutOfField { u: u.x, v: u.y });
        }
        let x0 = (u.x.floor() as usize).min(self.width - 3);
        let y0 = (u.y.floor() as usize).min(self.height - 3);
        Ok((x0, y0, u.x - x0 as f64, u.y - y0 as f64))
    }

    /// Bilinear sample; exact at integer pixel positions.
    pub fn sample(&self, u: &Vec2) -> Result<f64> {
        let (x0, y0, a, b) = self.cell(u)?;
        Ok(bilerp(
            self.at(x0, y0),
            self.at(x0 + 1, y0),
            self.at(x0, y0 + 1),
            self.at(x0 + 1, y0 + 1),
            a,
            b,
        ))
    }

    fn central_gradient(&self, x: usize, y: usize) -> (f64, f64) {
        (
            0.5 * (self.at(x + 1, y) - self.at(x - 1, y)),
            0.5 * (self.at(x, y + 1) - self.at(x, y - 1)),
        )
    }

    /// Central-difference gradients at the four surrounding pixels,
    /// bilinearly interpolated.
    pub fn sample_gradient(&self, u: &Vec2) -> Result<Vec2> {
        let (x0, y0, a, b) = self.cell(u)?;
        let g00 = self.central_gradient(x0, y0);
        let g10 = self.central_gradient(x0 + 1, y0);
        let g01 = self.central_gradient(x0, y0 + 1);
        let g11 = self.central_gradient(x0 + 1, y0 + 1);
        Ok(Vec2::new(
            bilerp(g00.0, g10.0, g01.0, g11.0, a, b),
            bilerp(g00.1, g10.1, g01.1, g11.1, a, b),
        ))
    }

    /// Derivative of the bilinear interpolant used by [`sample`](Self::sample).
    pub fn sample_gradient_exact(&self, u: &Vec2) -> Result<Vec2> {
        let (x0, y0, a, b) = self.cell(u)?;
        let (g00, g10) = (self.at(x0, y0), self.at(x0 + 1, y0));
        let (g01, g11) = (self.at(x0, y0 + 1), self.at(x0 + 1, y0 + 1));
        Ok(Vec2::new(
            (1.0 - b) * (g10 - g00) + b * (g11 - g01),
            (1.0 - a) * (g01 - g00) + a * (g11 - g10),
        ))
    }

    /// Distances clamped to 255 for inspection.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_vec(self.width, self.height, self.data.iter().map(|d| d.min(255.0)).collect())
            .expect("field dimensions")
    }
}

#[inline]
fn bilerp(g00: f64, g10: f64, g01: f64, g11: f64, a: f64, b: f64) -> f64 {
    (1.0 - a) * (1.0 - b) * g00 + a * (1.0 - b) * g10 + (1.0 - a) * b * g01 + a * b * g11
}
