use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FateError, Result};
use crate::linalg::Matrix;
use crate::rng;

use super::{Dataset, Provenance};

pub const RADIAL_OFFSET: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntanglementMode {
    /// Y and S signals live in disjoint coordinate blocks.
    Separable,
    /// Every `(y, s)` cell has its own cluster center over all coordinates.
    #[default]
    Entangled,
    /// Y sets the radius of a ring in the first two coordinates, the middle
    /// coordinates sit at [`RADIAL_OFFSET`] and S shifts the last one.
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub num_target_classes: usize,
    pub num_sensitive_classes: usize,
    /// Probability that S copies Y's latent factor.
    pub rho: f64,
    pub mode: EntanglementMode,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 2000,
            d: 10,
            num_target_classes: 2,
            num_sensitive_classes: 2,
            rho: 0.5,
            mode: EntanglementMode::Entangled,
            noise: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(FateError::BadSpec(msg));
        if !(0.0..=1.0).contains(&self.rho) {
            return fail(format!("rho must lie in [0, 1], got {}", self.rho));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail(format!("noise must be a finite value >= 0, got {}", self.noise));
        }
        if self.n < 2 {
            return fail(format!("n must be >= 2, got {}", self.n));
        }
        if self.d < 2 {
            return fail(format!("d must be >= 2, got {}", self.d));
        }
        if self.num_target_classes < 2 {
            return fail(format!("num_target_classes must be >= 2, got {}", self.num_target_classes));
        }
        if self.num_sensitive_classes < 2 {
            return fail(format!("num_sensitive_classes must be >= 2, got {}", self.num_sensitive_classes));
        }
        Ok(())
    }
}

fn gaussian_rows(rows: usize, cols: usize, r: &mut rng::Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, &[rng::TAG_SYNTHETIC]);
    let (n, d, c_y, c_s) = (spec.n, spec.d, spec.num_target_classes, spec.num_sensitive_classes);

    let y: Vec<u32> = (0..n).map(|_| r.random_range(0..c_y as u32)).collect();
    let s: Vec<u32> = y
        .iter()
        .map(|&u| if r.random_bool(spec.rho) { u % c_s as u32 } else { r.random_range(0..c_s as u32) })
        .collect();

    let mut x = Matrix::zeros(n, d);
    match spec.mode {
        EntanglementMode::Separable => {
            let d_y = d.div_ceil(2);
            let centers_y = gaussian_rows(c_y, d_y, &mut r);
            let centers_s = gaussian_rows(c_s, d - d_y, &mut r);
            for i in 0..n {
                let row = x.row_mut(i);
                row[..d_y].copy_from_slice(centers_y.row(y[i] as usize));
                row[d_y..].copy_from_slice(centers_s.row(s[i] as usize));
            }
        }
        EntanglementMode::Entangled => {
            let centers = gaussian_rows(c_y * c_s, d, &mut r);
            for i in 0..n {
                x.row_mut(i).copy_from_slice(centers.row(y[i] as usize * c_s + s[i] as usize));
            }
        }
        EntanglementMode::Radial => {
            for i in 0..n {
                let k = 2.min(d - 1);
                let dir: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut r)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let radius = 1.0 + y[i] as f64;
                let row = x.row_mut(i);
                row[..d - 1].fill(RADIAL_OFFSET);
                for (v, u) in row.iter_mut().zip(&dir) {
                    *v = radius * u / norm;
                }
                row[d - 1] = s[i] as f64 - 0.5 * (c_s - 1) as f64;
            }
        }
    }
    for v in x.as_mut_slice() {
        let e: f64 = StandardNormal.sample(&mut r);
        *v += spec.noise * e;
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::with_classes(x, y, s, c_y, c_s, names, Provenance::Synthetic(spec.clone()))
}
