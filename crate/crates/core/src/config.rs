//! Render configuration.

/// How the per-splat kernel is filtered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterMode {
    /// Raw object-space Gaussian.
    None,
    /// Legacy max with a screen-space Gaussian around the projected center.
    Clamp,
    /// Flat smoothing plus object-space Mip filter.
    Aa,
}

impl FilterMode {
    pub const ALL: [FilterMode; 3] = [FilterMode::None, FilterMode::Clamp, FilterMode::Aa];

    pub fn name(self) -> &'static str {
        match self {
            FilterMode::None => "none",
            FilterMode::Clamp => "clamp",
            FilterMode::Aa => "aa",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "none" => Some(FilterMode::None),
            "clamp" => Some(FilterMode::Clamp),
            "aa" => Some(FilterMode::Aa),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub filter_mode: FilterMode,
    /// Variance of the screen-space Mip filter, in pixels squared.
    pub mip_sigma: f64,
    /// Flat smoothing strength; the smoothing variance is `smooth_sreg / freq_bound^2`.
    pub smooth_sreg: f64,
    /// Standard deviation (pixels) of the screen-space branch in clamp mode.
    pub clamp_sigma: f64,
    pub tile_size: usize,
    /// Minimum per-splat contribution `alpha * G` that gets blended.
    pub alpha_cutoff: f64,
    pub transmittance_floor: f64,
    pub near_plane: f64,
    pub bbox_nsigma: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            filter_mode: FilterMode::Aa,
            mip_sigma: 0.1,
            smooth_sreg: 0.2,
            clamp_sigma: core::f64::consts::FRAC_1_SQRT_2,
            tile_size: 16,
            alpha_cutoff: 1.0 / 255.0,
            transmittance_floor: 1e-4,
            near_plane: 0.2,
            bbox_nsigma: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("tile_size must be 8, 16 or 32, got {0}")]
    TileSize(usize),
    #[error("{name} must be {requirement}, got {value}")]
    Range {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

impl RenderConfig {
    pub fn with_mode(filter_mode: FilterMode) -> Self {
        Self { filter_mode, ..Self::default() }
    }

    /// Filter strengths may be zero (which disables that filter); every other
    /// scalar must be strictly positive.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if ![8, 16, 32].contains(&self.tile_size) {
            return Err(ConfigError::TileSize(self.tile_size));
        }
        let nonneg = [("mip_sigma", self.mip_sigma), ("smooth_sreg", self.smooth_sreg)];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::Range { name, requirement: "finite and >= 0", value });
            }
        }
        let positive = [
            ("clamp_sigma", self.clamp_sigma),
            ("alpha_cutoff", self.alpha_cutoff),
            ("transmittance_floor", self.transmittance_floor),
            ("near_plane", self.near_plane),
            ("bbox_nsigma", self.bbox_nsigma),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::Range { name, requirement: "finite and > 0", value });
            }
        }
        Ok(())
    }
}
