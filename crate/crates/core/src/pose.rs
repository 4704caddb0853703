//! Rotation estimation by comparing an observed silhouette with rendered templates.

use rayon::prelude::*;
use thiserror::Error;

use crate::camera::CameraModel;
use crate::mask::{hu_moments, mask_stats, BinaryMask, MaskError};
use crate::math::Quat;
use crate::render::{icosphere_viewpoints, render_silhouette, RenderError, TriMesh, Viewpoint};

#[derive(Debug, Error, PartialEq)]
pub enum PoseError {
    #[error("empty mask: {0}")]
    Mask(#[from] MaskError),
    #[error("template rendering failed: {0}")]
    Render(#[from] RenderError),
    #[error("template set is empty")]
    EmptyTemplateSet,
    #[error("every template mask is empty")]
    AllTemplatesEmpty,
    #[error("template masks differ in resolution")]
    MixedResolution,
}

/// Side of the square grid both crops are resampled to before comparing areas.
pub const RESIZE_GRID: u32 = 128;

/// Hu moments whose magnitude is below this contribute nothing to the score.
pub const HU_ZERO: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MatchWeights {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchScore {
    pub area_term: f64,
    pub hu_term: f64,
    pub total: f64,
}

/// How a template set is rendered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateConfig {
    pub subdivision_level: u32,
    pub inplane_count: u32,
    /// Square template image side in pixels; the focal length equals this value.
    pub resolution: u32,
    /// Camera distance as a multiple of the mesh bounding radius.
    pub distance_factor: f64,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        Self {
            subdivision_level: 2,
            inplane_count: 8,
            resolution: 256,
            distance_factor: 10.0,
        }
    }
}

impl TemplateConfig {
    /// Template camera. The principal point is offset by a quarter pixel from the
    /// image center so that rolls by multiples of 90° land on distinct pixel
    /// lattices and no two viewpoints produce bit-identical masks by symmetry.
    pub fn camera(&self) -> CameraModel {
        let f = self.resolution as f64 * self.distance_factor * 0.4;
        let c = self.resolution as f64 / 2.0 + 0.25;
        CameraModel::new(f, f, c, c, self.resolution, self.resolution).expect("resolution is positive")
    }
}

/// Shape descriptors of a cropped silhouette that the score is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFeatures {
    /// `1 / (sgn(m) ln|m|)` per Hu moment, `0` where `|m| < HU_ZERO`.
    pub hu_log: [f64; 7],
    /// Foreground area after area-resampling the bounding-rectangle crop onto the common grid.
    pub resized_area: f64,
}

impl ShapeFeatures {
    pub fn of(mask: &BinaryMask) -> Result<Self, MaskError> {
        let stats = mask_stats(mask)?;
        let hu = hu_moments(mask)?;
        let mut hu_log = [0.0; 7];
        for (out, m) in hu_log.iter_mut().zip(hu.0) {
            if m.abs() >= HU_ZERO {
                let t = 1.0 / (m.signum() * m.abs().ln());
                *out = if t.is_finite() { t } else { 0.0 };
            }
        }
        // Area resampling preserves mass, so the resized foreground area is the
        // crop fill ratio times the grid area.
        let r = stats.bounding_rect;
        let fill = stats.area as f64 / (r.width() as f64 * r.height() as f64);
        Ok(Self {
            hu_log,
            resized_area: fill * (RESIZE_GRID * RESIZE_GRID) as f64,
        })
    }

    pub fn score(&self, other: &ShapeFeatures, weights: MatchWeights) -> MatchScore {
        let (a, b) = (self.resized_area, other.resized_area);
        let area_term = (1.0 - a.min(b) / a.max(b)).abs();
        let hu_term = self.hu_log.iter().zip(other.hu_log.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>();
        MatchScore {
            area_term,
            hu_term,
            total: weights.alpha * area_term + weights.beta * hu_term,
        }
    }
}

pub fn template_score(observed: &BinaryMask, template: &BinaryMask, alpha: f64, beta: f64) -> Result<MatchScore, PoseError> {
    let a = ShapeFeatures::of(observed)?;
    let b = ShapeFeatures::of(template)?;
    Ok(a.score(&b, MatchWeights { alpha, beta }))
}

#[derive(Debug, Clone)]
pub struct TemplateEntry {
    pub viewpoint: Viewpoint,
    pub mask: BinaryMask,
    /// `None` for an empty template mask, which never wins.
    pub features: Option<ShapeFeatures>,
}

impl TemplateEntry {
    /// Object rotation that reproduces this template from the canonical camera.
    pub fn object_rotation(&self) -> Quat {
        self.viewpoint.rotation.inverse()
    }
}

#[derive(Debug, Clone)]
pub struct TemplateSet {
    entries: Vec<TemplateEntry>,
    config: TemplateConfig,
    camera_distance: f64,
}

impl TemplateSet {
    /// Render templates of `mesh` (assumed centered at the origin) on the icosphere.
    pub fn render(mesh: &TriMesh, config: TemplateConfig) -> Result<Self, PoseError> {
        let radius = mesh.bounding_radius().max(1e-9) * config.distance_factor;
        let cam = config.camera();
        let views = icosphere_viewpoints(config.subdivision_level, config.inplane_count, radius);
        let entries = views
            .par_iter()
            .map(|v| {
                let mask = render_silhouette(mesh, &Quat::identity(), 1.0, v, &cam)?;
                let features = ShapeFeatures::of(&mask).ok();
                Ok(TemplateEntry { viewpoint: *v, mask, features })
            })
            .collect::<Result<Vec<_>, PoseError>>()?;
        let mut set = Self::from_entries(entries.into_iter().map(|e| (e.viewpoint, e.mask)).collect())?;
        set.config = config;
        set.camera_distance = radius;
        Ok(set)
    }

    /// Template set from explicit viewpoint/mask pairs.
    pub fn from_entries(entries: Vec<(Viewpoint, BinaryMask)>) -> Result<Self, PoseError> {
        let first = entries.first().ok_or(PoseError::EmptyTemplateSet)?;
        let (w, h) = (first.1.width(), first.1.height());
        if entries.iter().any(|(_, m)| m.width() != w || m.height() != h) {
            return Err(PoseError::MixedResolution);
        }
        let camera_distance = first.0.position.norm();
        let entries = entries
            .into_iter()
            .map(|(viewpoint, mask)| {
                let features = ShapeFeatures::of(&mask).ok();
                TemplateEntry { viewpoint, mask, features }
            })
            .collect();
        Ok(Self {
            entries,
            config: TemplateConfig {
                resolution: w,
                ..TemplateConfig::default()
            },
            camera_distance,
        })
    }

    pub fn entries(&self) -> &[TemplateEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn config(&self) -> &TemplateConfig {
        &self.config
    }

    /// Distance from the template cameras to the object center.
    pub fn camera_distance(&self) -> f64 {
        self.camera_distance
    }

    /// Score of `observed` against every template (`None` for empty templates).
    pub fn scores(&self, observed: &BinaryMask, weights: MatchWeights) -> Result<Vec<Option<MatchScore>>, PoseError> {
        let obs = ShapeFeatures::of(observed)?;
        Ok(self
            .entries
            .par_iter()
            .map(|e| e.features.map(|f| obs.score(&f, weights)))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseEstimate {
    pub rotation: Quat,
    pub score: MatchScore,
    pub template_index: usize,
}

/// Best-scoring template; ties go to the lowest index.
pub fn estimate_rotation(observed: &BinaryMask, templates: &TemplateSet, weights: MatchWeights) -> Result<PoseEstimate, PoseError> {
    let scores = templates.scores(observed, weights)?;
    let mut best: Option<(usize, MatchScore)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        if let Some(s) = s {
            if best.is_none_or(|(_, b)| s.total < b.total) {
                best = Some((i, s));
            }
        }
    }
    let (template_index, score) = best.ok_or(PoseError::AllTemplatesEmpty)?;
    Ok(PoseEstimate {
        rotation: templates.entries[template_index].object_rotation(),
        score,
        template_index,
    })
}
