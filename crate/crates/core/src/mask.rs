//! Binary silhouettes: dilation, statistics, border following, Hu moments.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MaskError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("mask dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("mask is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("mask index {index} out of range for {len} masks")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Row-major foreground flags.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("area", &self.area())
            .finish()
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskStats {
    /// Mean foreground pixel coordinate `(u, v)`.
    pub centroid: (f64, f64),
    pub bounding_rect: PixelRect,
    pub area: usize,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        })
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 || bits.len() != width as usize * height as usize {
            return Err(MaskError::InvalidDimensions { width, height });
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Result<Self, MaskError> {
        let mut m = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        Ok(m)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as u64) < self.width as u64 && (y as u64) < self.height as u64 && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Foreground coordinates in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    pub fn union_with(&mut self, other: &BinaryMask) -> Result<(), MaskError> {
        self.check_same_size(other)?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    pub fn count_disagreement(&self, other: &BinaryMask) -> Result<usize, MaskError> {
        self.check_same_size(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count())
    }

    pub fn check_same_size(&self, other: &BinaryMask) -> Result<(), MaskError> {
        if self.width != other.width || self.height != other.height {
            return Err(MaskError::DimensionMismatch {
                got_w: other.width,
                got_h: other.height,
                want_w: self.width,
                want_h: self.height,
            });
        }
        Ok(())
    }

    /// Sub-mask covering `rect`.
    pub fn crop(&self, rect: &PixelRect) -> BinaryMask {
        let (w, h) = (rect.width(), rect.height());
        let mut out = BinaryMask::new(w, h).expect("rect is nonempty");
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.get(rect.x0 + x, rect.y0 + y));
            }
        }
        out
    }

    /// Crop to the tight bounding rectangle of the foreground.
    pub fn crop_to_content(&self) -> Result<BinaryMask, MaskError> {
        let stats = mask_stats(self)?;
        Ok(self.crop(&stats.bounding_rect))
    }
}

/// Disk dilation: a pixel becomes foreground when some foreground pixel lies
/// within Euclidean distance `radius` of it.
pub fn dilate_mask(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let r = radius as i64;
    let offsets: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect();
    let mut out = mask.clone();
    let (w, h) = (mask.width as i64, mask.height as i64);
    for (x, y) in mask.foreground() {
        for (dx, dy) in &offsets {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h {
                out.set(nx as u32, ny as u32, true);
            }
        }
    }
    out
}

pub fn mask_stats(mask: &BinaryMask) -> Result<MaskStats, MaskError> {
    let mut area = 0usize;
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    let mut rect = PixelRect {
        x0: u32::MAX,
        y0: u32::MAX,
        x1: 0,
        y1: 0,
    };
    for (x, y) in mask.foreground() {
        area += 1;
        sx += x as f64;
        sy += y as f64;
        rect.x0 = rect.x0.min(x);
        rect.y0 = rect.y0.min(y);
        rect.x1 = rect.x1.max(x);
        rect.y1 = rect.y1.max(y);
    }
    if area == 0 {
        return Err(MaskError::EmptyMask);
    }
    Ok(MaskStats {
        centroid: (sx / area as f64, sy / area as f64),
        bounding_rect: rect,
        area,
    })
}

/// Closed pixel polyline; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<(i64, i64)>,
}

impl Contour {
    /// Perimeter of the closed polyline.
    pub fn arc_length(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as f64).sqrt()
            })
            .sum()
    }
}

// Clockwise on screen (y down), starting west.
const RING: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn ring_index(d: (i64, i64)) -> usize {
    RING.iter().position(|r| *r == d).expect("offset is an 8-neighbor")
}

/// Largest 8-connected component; ties go to the component found first in raster order.
pub fn largest_component(mask: &BinaryMask) -> Result<BinaryMask, MaskError> {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut label = vec![0u32; w * h];
    let mut best: Option<(usize, u32)> = None;
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.bits[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in RING {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get_signed(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        if best.map_or(true, |(s, _)| size > s) {
            best = Some((size, next));
        }
    }
    let (_, keep) = best.ok_or(MaskError::EmptyMask)?;
    BinaryMask::from_bits(mask.width, mask.height, label.iter().map(|l| *l == keep).collect())
}

/// Moore-neighbor border following on the largest 8-connected component,
/// returning the outer boundary and its perimeter.
pub fn trace_contour(mask: &BinaryMask) -> Result<(Contour, f64), MaskError> {
    let comp = largest_component(mask)?;
    let start = comp.foreground().next().ok_or(MaskError::EmptyMask)?;
    let s = (start.0 as i64, start.1 as i64);
    // The west neighbor of the first raster pixel is background.
    let step = |c: (i64, i64), back: usize| -> Option<((i64, i64), usize)> {
        for k in 1..=8 {
            let idx = (back + k) % 8;
            let p = (c.0 + RING[idx].0, c.1 + RING[idx].1);
            if comp.get_signed(p.0, p.1) {
                let prev = RING[(idx + 7) % 8];
                let b = (c.0 + prev.0 - p.0, c.1 + prev.1 - p.1);
                return Some((p, ring_index(b)));
            }
        }
        None
    };
    let mut points = vec![s];
    let Some((first, first_back)) = step(s, 0) else {
        let c = Contour { points };
        return Ok((c, 0.0));
    };
    let limit = 4 * comp.area() + 8;
    let (mut cur, mut back) = (first, first_back);
    for _ in 0..limit {
        let (next, nb) = step(cur, back).expect("a traced pixel keeps a neighbor");
        if cur == s && next == first {
            break;
        }
        points.push(cur);
        cur = next;
        back = nb;
    }
    let c = Contour { points };
    let len = c.arc_length();
    Ok((c, len))
}

/// The seven Hu invariants `h1..h7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuVector(pub [f64; 7]);

/// Hu invariants of the filled foreground region, each pixel integrated as the
/// unit square around its integer center. Square integration makes the moments
/// of a pixel-replicated copy exactly those of the scaled region.
pub fn hu_moments(mask: &BinaryMask) -> Result<HuVector, MaskError> {
    let (mut m00, mut m10, mut m01) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in mask.foreground() {
        m00 += 1.0;
        m10 += x as f64;
        m01 += y as f64;
    }
    if m00 == 0.0 {
        return Err(MaskError::EmptyMask);
    }
    let (xc, yc) = (m10 / m00, m01 / m00);
    let mut mu = [[0.0f64; 4]; 4];
    for (x, y) in mask.foreground() {
        let dx = x as f64 - xc;
        let dy = y as f64 - yc;
        // Integrals of dx^k over [dx - 1/2, dx + 1/2].
        let (sx2, sy2) = (dx * dx + 1.0 / 12.0, dy * dy + 1.0 / 12.0);
        mu[2][0] += sx2;
        mu[0][2] += sy2;
        mu[1][1] += dx * dy;
        mu[3][0] += dx * dx * dx + dx / 4.0;
        mu[0][3] += dy * dy * dy + dy / 4.0;
        mu[2][1] += sx2 * dy;
        mu[1][2] += dx * sy2;
    }
    let eta = |p: usize, q: usize| mu[p][q] / m00.powf(1.0 + (p + q) as f64 / 2.0);
    let (n20, n02, n11) = (eta(2, 0), eta(0, 2), eta(1, 1));
    let (n30, n03, n21, n12) = (eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2));

    let a = n30 + n12;
    let b = n21 + n03;
    let h1 = n20 + n02;
    let h2 = (n20 - n02).powi(2) + 4.0 * n11 * n11;
    let h3 = (n30 - 3.0 * n12).powi(2) + (3.0 * n21 - n03).powi(2);
    let h4 = a * a + b * b;
    let h5 = (n30 - 3.0 * n12) * a * (a * a - 3.0 * b * b) + (3.0 * n21 - n03) * b * (3.0 * a * a - b * b);
    let h6 = (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b;
    let h7 = (3.0 * n21 - n03) * a * (a * a - 3.0 * b * b) - (n30 - 3.0 * n12) * b * (3.0 * a * a - b * b);
    Ok(HuVector([h1, h2, h3, h4, h5, h6, h7]))
}

/// Default inpainting dilation radius: 5 px at 640x480, scaled with the image diagonal.
pub fn default_dilation_radius(width: u32, height: u32) -> u32 {
    let diag = ((width as f64).powi(2) + (height as f64).powi(2)).sqrt();
    (5.0 * diag / 800.0).round().max(1.0) as u32
}

/// Union of every mask except `keep_index`, each dilated by `dilation_radius`:
/// the region an inpainter must fill to expose object `keep_index` alone.
pub fn build_inpainting_mask(all: &[BinaryMask], keep_index: usize, dilation_radius: u32) -> Result<BinaryMask, MaskError> {
    let keep = all.get(keep_index).ok_or(MaskError::IndexOutOfRange {
        index: keep_index,
        len: all.len(),
    })?;
    let mut out = BinaryMask::new(keep.width, keep.height)?;
    for (i, m) in all.iter().enumerate() {
        if i != keep_index {
            out.union_with(&dilate_mask(m, dilation_radius))?;
        }
    }
    Ok(out)
}
