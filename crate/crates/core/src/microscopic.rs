//! Exact single-excitation evolution of an emitter coupled to a finite grid of
//! waveguide modes, the starting Hamiltonian before any coarse graining.
//!
//! Basis: `|e, vac>` first, then `|g, 1_j>` for each mode. The Hamiltonian is an
//! arrowhead matrix, so its spectrum follows from the secular equation
//! `lambda = sum_j g^2 / (lambda - omega_j)` with one root between each pair of
//! neighbouring mode frequencies and one beyond each end.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::least_squares_slope;
use crate::operator::{Operator, C64, I};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n_modes: usize,
    half_width: f64,
}

impl FrequencyGrid {
    /// `n_modes` uniform frequencies on `[-half_width, half_width]`.
    pub fn new(n_modes: usize, half_width: f64) -> Result<Self> {
        if n_modes < 3 || n_modes.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "n_modes must be odd and >= 3, got {n_modes}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(FrequencyGrid { n_modes, half_width })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_modes - 1) as f64
    }

    pub fn frequency(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_modes).map(|j| self.frequency(j)).collect()
    }

    /// Time after which the discrete spectrum rephases and the emitter revives.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }
}

/// Flat coupling `g = sqrt(gamma * spacing / 2 pi)` to every mode, so that
/// the golden-rule rate `2 pi g^2 / spacing` equals `gamma`.
#[derive(Debug, Clone)]
pub struct MicroscopicModel {
    grid: FrequencyGrid,
    gamma: f64,
    coupling: f64,
}

pub fn build_microscopic(grid: FrequencyGrid, gamma: f64) -> Result<MicroscopicModel> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    Ok(MicroscopicModel {
        grid,
        gamma,
        coupling: (gamma * grid.spacing() / (2.0 * PI)).sqrt(),
    })
}

impl MicroscopicModel {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn dim(&self) -> usize {
        self.grid.n_modes + 1
    }

    /// Dense Hamiltonian. `<g,1_j|H|e,vac> = i g`, from `i sqrt(gamma) (sigma b^dag - sigma^dag b)`.
    pub fn to_operator(&self) -> Operator {
        let mut h = Operator::zeros(&[self.dim()]);
        for j in 0..self.grid.n_modes {
            h[(j + 1, j + 1)] = C64::new(self.grid.frequency(j), 0.0);
            h[(j + 1, 0)] = I * self.coupling;
            h[(0, j + 1)] = -I * self.coupling;
        }
        h
    }

    fn secular(&self, lambda: f64, omegas: &[f64]) -> f64 {
        let g2 = self.coupling * self.coupling;
        lambda - omegas.iter().map(|&w| g2 / (lambda - w)).sum::<f64>()
    }

    /// Eigenvalues and their overlaps `|<e,vac|k>|^2`.
    fn spectrum(&self) -> Spectrum {
        let omegas = self.grid.frequencies();
        let n = omegas.len();
        let g2 = self.coupling * self.coupling;
        if g2 == 0.0 {
            let mut eigenvalues = vec![0.0];
            eigenvalues.extend(&omegas);
            let mut weights = vec![0.0; n + 1];
            weights[0] = 1.0;
            return Spectrum { eigenvalues, weights };
        }
        let reach = 2.0 * self.grid.half_width + n as f64 * self.coupling + 1.0;
        let mut eigenvalues = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let lo = if k == 0 { omegas[0] - reach } else { omegas[k - 1] };
            let hi = if k == n { omegas[n - 1] + reach } else { omegas[k] };
            eigenvalues.push(self.bisect_root(lo, hi, &omegas));
        }
        let weights = eigenvalues
            .iter()
            .map(|&l| 1.0 / (1.0 + omegas.iter().map(|&w| g2 / ((l - w) * (l - w))).sum::<f64>()))
            .collect();
        Spectrum { eigenvalues, weights }
    }

    /// The secular function increases monotonically from -inf to +inf on the open
    /// interval `(lo, hi)`, so bisection on its sign converges to the unique root.
    fn bisect_root(&self, mut lo: f64, mut hi: f64, omegas: &[f64]) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.secular(mid, omegas) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone)]
struct Spectrum {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

/// Amplitudes in the one-excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub c_e: C64,
    pub c_modes: Vec<C64>,
}

impl SingleExcitationState {
    pub fn norm_sqr(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_modes.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Diagonalized model, ready to evolve the initially excited emitter to any time.
#[derive(Debug, Clone)]
pub struct Propagator {
    model: MicroscopicModel,
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(model: &MicroscopicModel) -> Self {
        Propagator {
            spectrum: model.spectrum(),
            model: model.clone(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    fn guard(&self, t: f64) -> Result<()> {
        let limit = self.model.grid.recurrence_time();
        if !(t >= 0.0 && t < limit) {
            return Err(Error::Recurrence { t, limit });
        }
        Ok(())
    }

    pub fn emitter_amplitude(&self, t: f64) -> Result<C64> {
        self.guard(t)?;
        Ok(self
            .spectrum
            .eigenvalues
            .iter()
            .zip(&self.spectrum.weights)
            .map(|(&l, &w)| C64::from_polar(w, -l * t))
            .sum())
    }

    /// Full single-excitation state at time `t`, starting from `|e, vac>`.
    pub fn state(&self, t: f64) -> Result<SingleExcitationState> {
        let c_e = self.emitter_amplitude(t)?;
        let phases: Vec<C64> = self
            .spectrum
            .eigenvalues
            .iter()
            .zip(&self.spectrum.weights)
            .map(|(&l, &w)| C64::from_polar(w, -l * t))
            .collect();
        let g = self.model.coupling;
        let c_modes = self
            .model
            .grid
            .frequencies()
            .iter()
            .map(|&omega| {
                let s: C64 = self
                    .spectrum
                    .eigenvalues
                    .iter()
                    .zip(&phases)
                    .map(|(&l, &ph)| ph / (l - omega))
                    .sum();
                I * g * s
            })
            .collect();
        Ok(SingleExcitationState { c_e, c_modes })
    }
}

/// Survival probability `|c_e(t_i)|^2` at `steps + 1` evenly spaced times in `[0, t]`.
pub fn evolve_microscopic(model: &MicroscopicModel, t: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let prop = Propagator::new(model);
    prop.guard(t)?;
    (0..=steps)
        .map(|i| {
            let ti = t * i as f64 / steps as f64;
            Ok((ti, prop.emitter_amplitude(ti)?.norm_sqr()))
        })
        .collect()
}

/// Decay-fit window `[0.5, 2.5] / gamma`, clipped to the simulated time.
pub fn fit_window(gamma: f64, t_final: f64) -> (f64, f64) {
    (0.5 / gamma, (2.5 / gamma).min(t_final))
}

/// Least-squares slope of `ln |c_e|^2` over samples with `t` in `[t_lo, t_hi]`.
pub fn fitted_decay_rate(samples: &[(f64, f64)], t_lo: f64, t_hi: f64) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|(t, _)| *t >= t_lo - 1e-12 && *t <= t_hi + 1e-12)
        .map(|&(t, p)| (t, p.ln()))
        .unzip();
    least_squares_slope(&xs, &ys)
}
