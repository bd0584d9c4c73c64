use alloc::vec;
use alloc::vec::Vec;

/// Row-major interleaved image of `f64` samples, top-left origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("image dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("image {0}x{1} is smaller than the {2}x{2} window")]
    TooSmall(usize, usize, usize),
    #[error("downsample factor {factor} does not divide {width}x{height}")]
    BadFactor { factor: usize, width: usize, height: usize },
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self { width, height, channels, data: vec![0.0; width * height * channels] }
    }

    pub fn filled(width: usize, height: usize, value: &[f64]) -> Self {
        let mut data = Vec::with_capacity(width * height * value.len());
        for _ in 0..width * height {
            data.extend_from_slice(value);
        }
        Self { width, height, channels: value.len(), data }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn check_same_dims(&self, other: &Image) -> Result<(), ImageError> {
        if self.dims() != other.dims() {
            return Err(ImageError::DimensionMismatch(self.dims(), other.dims()));
        }
        Ok(())
    }

    /// Per-pixel channel mean.
    pub fn to_gray(&self) -> Image {
        let mut out = Image::new(self.width, self.height, 1);
        let n = self.channels as f64;
        for (o, px) in out.data.iter_mut().zip(self.data.chunks_exact(self.channels)) {
            *o = px.iter().sum::<f64>() / n;
        }
        out
    }

    /// Box filter: averages each `factor x factor` block.
    pub fn box_downsample(&self, factor: usize) -> Result<Image, ImageError> {
        if factor == 0 || !self.width.is_multiple_of(factor) || !self.height.is_multiple_of(factor) {
            return Err(ImageError::BadFactor { factor, width: self.width, height: self.height });
        }
        let (w, h, c) = (self.width / factor, self.height / factor, self.channels);
        let mut out = Image::new(w, h, c);
        let norm = 1.0 / (factor * factor) as f64;
        let mut block = vec![0.0; factor * factor];
        for y in 0..h {
            for x in 0..w {
                for k in 0..c {
                    for yy in 0..factor {
                        for xx in 0..factor {
                            let i = ((y * factor + yy) * self.width + x * factor + xx) * c;
                            block[yy * factor + xx] = self.data[i + k];
                        }
                    }
                    out.pixel_mut(x, y)[k] = pairwise_sum(&block) * norm;
                }
            }
        }
        Ok(out)
    }

    /// Largest finite-difference gradient magnitude of the gray image, using
    /// forward differences.
    pub fn max_gradient(&self) -> f64 {
        let g = self.to_gray();
        let mut best = 0.0f64;
        for y in 0..g.height {
            for x in 0..g.width {
                let v = g.data[y * g.width + x];
                let dx = if x + 1 < g.width { g.data[y * g.width + x + 1] - v } else { 0.0 };
                let dy = if y + 1 < g.height { g.data[(y + 1) * g.width + x] - v } else { 0.0 };
                best = best.max(libm::sqrt(dx * dx + dy * dy));
            }
        }
        best
    }
}

/// Tree summation: exact for a power-of-two count of equal values.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Buffers produced by one render.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderOutput {
    pub color: Image,
    pub alpha: Image,
    /// Alpha-weighted mean camera-space depth; 0 where nothing was hit.
    pub depth: Image,
    /// Alpha-blended world-space normals, oriented towards the camera.
    pub normal: Image,
    /// Contributions skipped because the ray was edge-on to the splat.
    pub degenerate_skips: usize,
}

impl RenderOutput {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            color: Image::new(width, height, 3),
            alpha: Image::new(width, height, 1),
            depth: Image::new(width, height, 1),
            normal: Image::new(width, height, 3),
            degenerate_skips: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_downsample_preserves_constants() {
        let img = Image::filled(8, 4, &[0.25, 0.5, 0.75]);
        let d = img.box_downsample(4).unwrap();
        assert_eq!(d, Image::filled(2, 1, &[0.25, 0.5, 0.75]));
        assert_eq!(img.box_downsample(1).unwrap(), img);
        assert!(img.box_downsample(3).is_err());
    }

    #[test]
    fn box_downsample_is_exact_on_constants() {
        for f in [2, 4, 8] {
            let img = Image::filled(16, 8, &[0.3, 0.1, 0.7]);
            assert_eq!(img.box_downsample(f).unwrap(), Image::filled(16 / f, 8 / f, &[0.3, 0.1, 0.7]));
        }
    }

    #[test]
    fn box_downsample_averages() {
        let mut img = Image::new(2, 2, 1);
        img.data.copy_from_slice(&[0.0, 1.0, 2.0, 5.0]);
        assert_eq!(img.box_downsample(2).unwrap().data, vec![2.0]);
    }

    #[test]
    fn gradient_of_step() {
        let mut img = Image::new(4, 1, 3);
        for x in 2..4 {
            img.pixel_mut(x, 0).copy_from_slice(&[1.0, 1.0, 1.0]);
        }
        assert_eq!(img.max_gradient(), 1.0);
        assert_eq!(Image::filled(3, 3, &[0.3]).max_gradient(), 0.0);
    }
}
