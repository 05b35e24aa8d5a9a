//! Fan-beam acquisition geometry.
//!
//! The scanner rotates a point source and a flat detector array around the
//! isocenter, which sits at the center of the image grid. Image coordinates
//! put the origin at the isocenter; a pixel at (row `r`, column `c`) of an
//! `n`-pixel grid has center
//! `x = (c - (n-1)/2) * pixel_spacing`, `y = (r - (n-1)/2) * pixel_spacing`.
//! At view angle `b` the source sits at `(R_si*cos b, R_si*sin b)` and the
//! detector line crosses the central ray at `(-R_id*cos b, -R_id*sin b)`,
//! oriented along `(-sin b, cos b)`. View 0 places the source on the +x
//! axis; angles increase counter-clockwise.

use crate::error::{Error, Result};

/// Scanner description. Immutable after construction; all methods are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct FanBeamGeometry {
    /// Number of detector channels.
    pub n_detectors: usize,
    /// Number of projection angles over the full rotation.
    pub n_views: usize,
    /// Source-to-isocenter distance, in image units.
    pub source_to_iso: f64,
    /// Isocenter-to-detector distance, in image units.
    pub iso_to_detector: f64,
    /// Center-to-center spacing of detector elements, in image units.
    pub detector_spacing: f64,
    /// Side length of the square reconstruction grid, in pixels.
    pub image_size: usize,
    /// Physical size of one image pixel.
    pub pixel_spacing: f64,
}

impl Default for FanBeamGeometry {
    fn default() -> Self {
        FanBeamGeometry {
            n_detectors: 681,
            n_views: 984,
            source_to_iso: 722.0,
            iso_to_detector: 722.0,
            detector_spacing: 2.0,
            image_size: 512,
            pixel_spacing: 1.0,
        }
    }
}

impl FanBeamGeometry {
    /// Validates the field invariants, including that the detector array
    /// covers the magnified field of view:
    /// `n_detectors * detector_spacing >= magnification * image_size * pixel_spacing`.
    pub fn new(
        n_detectors: usize,
        n_views: usize,
        source_to_iso: f64,
        iso_to_detector: f64,
        detector_spacing: f64,
        image_size: usize,
        pixel_spacing: f64,
    ) -> Result<Self> {
        let g = FanBeamGeometry {
            n_detectors,
            n_views,
            source_to_iso,
            iso_to_detector,
            detector_spacing,
            image_size,
            pixel_spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_detectors < 2 {
            return Err(Error::invalid("n_detectors must be >= 2"));
        }
        if self.n_views < 1 {
            return Err(Error::invalid("n_views must be >= 1"));
        }
        if !(self.source_to_iso > 0.0) || !(self.iso_to_detector > 0.0) {
            return Err(Error::invalid("source/detector distances must be > 0"));
        }
        if !(self.detector_spacing > 0.0) {
            return Err(Error::invalid("detector_spacing must be > 0"));
        }
        if self.image_size < 1 {
            return Err(Error::invalid("image_size must be >= 1"));
        }
        if !(self.pixel_spacing > 0.0) {
            return Err(Error::invalid("pixel_spacing must be > 0"));
        }
        let det_len = self.n_detectors as f64 * self.detector_spacing;
        let fov_needed = self.magnification() * self.image_size as f64 * self.pixel_spacing;
        if det_len < fov_needed {
            return Err(Error::invalid(format!(
                "detector array ({det_len} units) does not cover the magnified \
                 field of view ({fov_needed} units)"
            )));
        }
        Ok(())
    }

    /// Default geometry rescaled to a smaller grid: detector count, view
    /// count and distances shrink proportionally, spacings stay put.
    /// Handy for tests at 32..256 pixels.
    pub fn scaled_to(image_size: usize) -> Result<Self> {
        let d = FanBeamGeometry::default();
        let f = image_size as f64 / d.image_size as f64;
        FanBeamGeometry::new(
            ((d.n_detectors as f64 * f).ceil() as usize).max(2),
            ((d.n_views as f64 * f).ceil() as usize).max(1),
            d.source_to_iso * f,
            d.iso_to_detector * f,
            d.detector_spacing,
            image_size,
            d.pixel_spacing,
        )
    }

    /// `(source_to_iso + iso_to_detector) / source_to_iso`.
    pub fn magnification(&self) -> f64 {
        (self.source_to_iso + self.iso_to_detector) / self.source_to_iso
    }

    /// Source-to-detector distance along the central ray.
    pub fn source_to_detector(&self) -> f64 {
        self.source_to_iso + self.iso_to_detector
    }

    /// Angle of view `i`: exactly `2*pi*i/n_views`.
    pub fn view_angle(&self, i: usize) -> Result<f64> {
        if i >= self.n_views {
            return Err(Error::invalid(format!(
                "view index {i} out of range (n_views = {})",
                self.n_views
            )));
        }
        Ok(std::f64::consts::TAU * i as f64 / self.n_views as f64)
    }

    /// Lateral offset of a detector channel from the central ray,
    /// `(channel - (n_detectors-1)/2) * detector_spacing`.
    pub fn channel_offset(&self, channel: usize) -> f64 {
        (channel as f64 - (self.n_detectors as f64 - 1.0) / 2.0) * self.detector_spacing
    }

    /// Endpoints of the ray for (view, channel): the source position and
    /// the detector-element position, in image coordinates.
    pub fn ray_endpoints(&self, view: usize, channel: usize) -> Result<([f64; 2], [f64; 2])> {
        if channel >= self.n_detectors {
            return Err(Error::invalid(format!(
                "channel index {channel} out of range (n_detectors = {})",
                self.n_detectors
            )));
        }
        let beta = self.view_angle(view)?;
        let (sin_b, cos_b) = beta.sin_cos();
        let source = [self.source_to_iso * cos_b, self.source_to_iso * sin_b];
        let u = self.channel_offset(channel);
        let det = [
            -self.iso_to_detector * cos_b - u * sin_b,
            -self.iso_to_detector * sin_b + u * cos_b,
        ];
        Ok((source, det))
    }

    /// Half-extent of the detector array, in lateral-offset units.
    pub fn detector_half_extent(&self) -> f64 {
        (self.n_detectors as f64 - 1.0) / 2.0 * self.detector_spacing
    }
}
