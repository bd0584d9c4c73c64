//! Image quality metrics: MSE, PSNR and SSIM.
//!
//! SSIM follows Wang et al.: grayscale (channel mean), 11x11 Gaussian window
//! with sigma 1.5, `C1 = 0.01^2`, `C2 = 0.03^2`, averaged over all window
//! positions fully inside the image.

use alloc::vec;
use alloc::vec::Vec;

use crate::image::{Image, ImageError};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
pub const PSNR_CAP: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
    pub mse: f64,
}

pub fn mse(a: &Image, b: &Image) -> Result<f64, ImageError> {
    a.check_same_dims(b)?;
    let sum: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.data.len().max(1) as f64)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse < 1e-10 {
        PSNR_CAP
    } else {
        (10.0 * libm::log10(1.0 / mse)).min(PSNR_CAP)
    }
}

/// PSNR in dB for images with values in `[0, 1]`, capped at 100 dB.
pub fn psnr(a: &Image, b: &Image) -> Result<f64, ImageError> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn evaluate(a: &Image, b: &Image) -> Result<MetricReport, ImageError> {
    let mse = mse(a, b)?;
    Ok(MetricReport { psnr: psnr_from_mse(mse), ssim: ssim(a, b)?, mse })
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = libm::exp(-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

/// Separable "valid" correlation of a single-channel buffer.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..n).map(|i| k[i] * tmp[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Adjoint of [`filter_valid`]: scatters a valid-sized map back onto the
/// `w x h` input grid.
fn filter_valid_adjoint(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..oh {
        for i in 0..n {
            for x in 0..ow {
                tmp[(y + i) * ow + x] += k[i] * src[y * ow + x];
            }
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..ow {
            let v = tmp[y * ow + x];
            for i in 0..n {
                out[y * w + x + i] += k[i] * v;
            }
        }
    }
    out
}

struct SsimStats {
    w: usize,
    h: usize,
    mu_x: Vec<f64>,
    mu_y: Vec<f64>,
    m_xx: Vec<f64>,
    m_yy: Vec<f64>,
    m_xy: Vec<f64>,
}

fn ssim_stats(x: &[f64], y: &[f64], w: usize, h: usize, k: &[f64]) -> SsimStats {
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    SsimStats {
        w,
        h,
        mu_x: filter_valid(x, w, h, k),
        mu_y: filter_valid(y, w, h, k),
        m_xx: filter_valid(&xx, w, h, k),
        m_yy: filter_valid(&yy, w, h, k),
        m_xy: filter_valid(&xy, w, h, k),
    }
}

fn check_ssim_dims(a: &Image, b: &Image) -> Result<(), ImageError> {
    a.check_same_dims(b)?;
    if a.width < SSIM_WINDOW || a.height < SSIM_WINDOW {
        return Err(ImageError::TooSmall(a.width, a.height, SSIM_WINDOW));
    }
    Ok(())
}

/// Mean structural similarity of the grayscale images.
pub fn ssim(a: &Image, b: &Image) -> Result<f64, ImageError> {
    Ok(ssim_impl(a, b, false)?.0)
}

/// SSIM and its gradient with respect to every sample of `a`.
pub fn ssim_with_grad(a: &Image, b: &Image) -> Result<(f64, Image), ImageError> {
    let (v, g) = ssim_impl(a, b, true)?;
    Ok((v, g.unwrap()))
}

fn ssim_impl(a: &Image, b: &Image, want_grad: bool) -> Result<(f64, Option<Image>), ImageError> {
    check_ssim_dims(a, b)?;
    let (x, y) = (a.to_gray(), b.to_gray());
    let k = gaussian_window();
    let st = ssim_stats(&x.data, &y.data, a.width, a.height, &k);
    let n = st.mu_x.len();
    let mut total = 0.0;
    let (mut d_mu, mut d_xx, mut d_xy) = if want_grad {
        (vec![0.0; n], vec![0.0; n], vec![0.0; n])
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };
    for i in 0..n {
        let (mx, my) = (st.mu_x[i], st.mu_y[i]);
        let var_x = st.m_xx[i] - mx * mx;
        let var_y = st.m_yy[i] - my * my;
        let cov = st.m_xy[i] - mx * my;
        let a1 = 2.0 * mx * my + SSIM_C1;
        let a2 = 2.0 * cov + SSIM_C2;
        let b1 = mx * mx + my * my + SSIM_C1;
        let b2 = var_x + var_y + SSIM_C2;
        let s = (a1 * a2) / (b1 * b2);
        total += s;
        if want_grad {
            d_mu[i] = s * ((2.0 * my / a1 - 2.0 * mx / b1) + (2.0 * mx / b2 - 2.0 * my / a2));
            d_xx[i] = -s / b2;
            d_xy[i] = 2.0 * s / a2;
        }
    }
    let value = total / n as f64;
    if !want_grad {
        return Ok((value, None));
    }
    let (w, h) = (st.w, st.h);
    let g_mu = filter_valid_adjoint(&d_mu, w, h, &k);
    let g_xx = filter_valid_adjoint(&d_xx, w, h, &k);
    let g_xy = filter_valid_adjoint(&d_xy, w, h, &k);
    let mut grad = Image::new(a.width, a.height, a.channels);
    let scale = 1.0 / (n as f64 * a.channels as f64);
    for q in 0..w * h {
        let g = (g_mu[q] + 2.0 * x.data[q] * g_xx[q] + y.data[q] * g_xy[q]) * scale;
        for c in 0..a.channels {
            grad.data[q * a.channels + c] = g;
        }
    }
    Ok((value, Some(grad)))
}
