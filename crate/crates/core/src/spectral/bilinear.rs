//! The advection term `B[u,v](k) = iκ₀ 𝒫 Σ_ℓ (k·û(ℓ)) v̂(k−ℓ)` restricted to
//! the truncation box, by exact convolution and by a zero-padded FFT.

use super::leray_project_in_place;
use crate::error::Result;
use crate::field::SpectralField;
use crate::lattice::{Lattice, Slot};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Dense copy of a field over the whole box, partners included.
fn densify(u: &SpectralField) -> Vec<Complex64> {
    let lattice = u.lattice();
    let n = u.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); lattice.dense_len() * n];
    for idx in 0..lattice.dense_len() {
        match lattice.slot_dense(idx) {
            Slot::Origin => {}
            Slot::Stored(i) => out[idx * n..(idx + 1) * n].copy_from_slice(u.coeff(i)),
            Slot::Partner(i) => {
                for (dst, src) in out[idx * n..(idx + 1) * n].iter_mut().zip(u.coeff(i)) {
                    *dst = src.conj();
                }
            }
        }
    }
    out
}

fn finish(mut raw: SpectralField) -> SpectralField {
    let k0 = raw.params().kappa0();
    let ik0 = Complex64::new(0.0, k0);
    raw.coeffs_mut().iter_mut().for_each(|z| *z *= ik0);
    leray_project_in_place(&mut raw);
    raw
}

/// Sum of `(k·û(ℓ)) v̂(k−ℓ)` over all `ℓ` with `ℓ` and `k−ℓ` in the box.
fn convolve_at(
    lattice: &Lattice,
    k: &[i32],
    du: &[Complex64],
    dv: &[Complex64],
    out: &mut [Complex64],
) {
    let n = lattice.dim();
    let kk = lattice.k_max();
    let side = lattice.side() as i64;
    let lo: Vec<i32> = k.iter().map(|&c| (-kk).max(c - kk)).collect();
    let hi: Vec<i32> = k.iter().map(|&c| kk.min(c + kk)).collect();
    let index = |p: &[i32]| -> usize {
        p.iter().fold(0i64, |acc, &c| acc * side + (c + kk) as i64) as usize
    };
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    let mut l = lo.clone();
    let mut m = vec![0i32; n];
    loop {
        for j in 0..n {
            m[j] = k[j] - l[j];
        }
        let li = index(&l);
        let mi = index(&m);
        let ul = &du[li * n..(li + 1) * n];
        let kdot: Complex64 = (0..n).map(|j| ul[j] * k[j] as f64).sum();
        if kdot.re != 0.0 || kdot.im != 0.0 {
            let vm = &dv[mi * n..(mi + 1) * n];
            for j in 0..n {
                out[j] += kdot * vm[j];
            }
        }
        // odometer over the admissible ℓ range
        let mut axis = n;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if l[axis] < hi[axis] {
                l[axis] += 1;
                break;
            }
            l[axis] = lo[axis];
        }
    }
}

/// `B[u,v]` by exact double-loop convolution over the truncated lattice.
pub fn bilinear_direct(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.ensure_compatible(v)?;
    let lattice = Arc::clone(u.lattice());
    let n = u.dim();
    let du = densify(u);
    let dv = densify(v);
    let mut raw = u.zeros_like();
    raw.coeffs_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, out)| {
            convolve_at(&lattice, lattice.mode(i).components(), &du, &dv, out);
        });
    Ok(finish(raw))
}

/// Smallest `2^a 3^b 5^c ≥ 3K + 1`; quadratic products on this grid are alias-free
/// for output modes inside the box.
pub fn fft_grid_size(k_max: i32) -> usize {
    let min = (3 * k_max + 1) as usize;
    (min..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

/// Reusable FFT plans for evaluating `B` on one lattice.
pub struct BilinearFft {
    dim: usize,
    k_max: i32,
    grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BilinearFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BilinearFft")
            .field("dim", &self.dim)
            .field("k_max", &self.k_max)
            .field("grid", &self.grid)
            .finish()
    }
}

impl BilinearFft {
    pub fn new(dim: usize, k_max: i32) -> Self {
        let grid = fft_grid_size(k_max);
        let mut planner = FftPlanner::new();
        Self {
            dim,
            k_max,
            grid,
            forward: planner.plan_fft_forward(grid),
            inverse: planner.plan_fft_inverse(grid),
        }
    }

    pub fn for_field(u: &SpectralField) -> Self {
        Self::new(u.dim(), u.k_max())
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    fn grid_index(&self, k: &[i32]) -> usize {
        let g = self.grid as i64;
        k.iter()
            .fold(0i64, |acc, &c| acc * g + (c as i64).rem_euclid(g)) as usize
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let g = self.grid;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // contiguous last axis
        fft.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); g];
        for axis in 0..self.dim - 1 {
            let stride = g.pow((self.dim - 1 - axis) as u32);
            let block = stride * g;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (t, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + t * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (t, val) in line.iter().enumerate() {
                        data[start + t * stride] = *val;
                    }
                }
            }
        }
    }

    /// Physical-space samples of each velocity component.
    fn to_physical(&self, u: &SpectralField) -> Vec<Vec<Complex64>> {
        let n = self.dim;
        let size = self.grid.pow(n as u32);
        let mut comps = vec![vec![Complex64::new(0.0, 0.0); size]; n];
        let lattice = u.lattice();
        for (i, mode) in lattice.modes().iter().enumerate() {
            let k = mode.components();
            let a = self.grid_index(k);
            let b = self.grid_index(mode.neg().components());
            let c = u.coeff(i);
            for j in 0..n {
                comps[j][a] = c[j];
                comps[j][b] = c[j].conj();
            }
        }
        for comp in comps.iter_mut() {
            self.transform(comp, &self.inverse);
        }
        comps
    }

    pub fn apply(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        u.ensure_compatible(v)?;
        assert_eq!(
            (u.dim(), u.k_max()),
            (self.dim, self.k_max),
            "FFT plan built for a different lattice"
        );
        let n = self.dim;
        let pu = self.to_physical(u);
        let same = std::ptr::eq(u, v) || u.coeffs() == v.coeffs();
        let pv = if same { pu.clone() } else { self.to_physical(v) };
        let size = self.grid.pow(n as u32);
        let norm = 1.0 / size as f64;

        // products[j][i] = (u_j v_i)^ on the grid
        let products: Vec<Vec<Vec<Complex64>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let mut p: Vec<Complex64> = pu[j]
                            .iter()
                            .zip(&pv[i])
                            .map(|(a, b)| Complex64::new(a.re * b.re, 0.0))
                            .collect();
                        self.transform(&mut p, &self.forward);
                        p
                    })
                    .collect()
            })
            .collect();

        let mut raw = u.zeros_like();
        let lattice = Arc::clone(u.lattice());
        for (idx, mode) in lattice.modes().iter().enumerate() {
            let k = mode.components();
            let gi = self.grid_index(k);
            let out = raw.coeff_mut(idx);
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += products[j][i][gi] * k[j] as f64;
                }
                out[i] = acc * norm;
            }
        }
        Ok(finish(raw))
    }
}

/// `B[u,v]` through a zero-padded FFT; agrees with [`bilinear_direct`] to rounding.
pub fn bilinear_fft(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.ensure_compatible(v)?;
    BilinearFft::for_field(u).apply(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::spectral::{random_field, taylor_green, AmplitudeProfile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn smooth_grid_sizes() {
        assert_eq!(fft_grid_size(10), 32);
        assert_eq!(fft_grid_size(8), 25);
        assert_eq!(fft_grid_size(42), 128);
        assert_eq!(fft_grid_size(1), 4);
    }

    #[test]
    fn shear_mode_self_interaction_vanishes() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 4).unwrap();
        u.set(&[1, 0], &[c(0.0, 0.0), c(0.7, 0.0)]).unwrap();
        let b = bilinear_direct(&u, &u).unwrap();
        assert_eq!(b.max_magnitude(), 0.0);
        assert!(bilinear_fft(&u, &u).unwrap().max_magnitude() < 1e-15);
    }

    #[test]
    fn crossed_shear_modes() {
        // u: ±(1,0) with û=(0,1); v: ±(0,1) with v̂=(1,0).
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let mut u = SpectralField::zeros(p, 3).unwrap();
        u.set(&[1, 0], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let mut v = SpectralField::zeros(p, 3).unwrap();
        v.set(&[0, 1], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = bilinear_direct(&u, &v).unwrap();

        // brute force over every (ℓ, k−ℓ) pair in the box
        let lattice = u.lattice().clone();
        for (idx, mode) in lattice.modes().iter().enumerate() {
            let k = mode.components();
            let mut acc = [c(0.0, 0.0); 2];
            for l0 in -3..=3 {
                for l1 in -3..=3 {
                    let m = [k[0] - l0, k[1] - l1];
                    if m[0].abs() > 3 || m[1].abs() > 3 {
                        continue;
                    }
                    let ul = u.get(&[l0, l1]);
                    let vm = v.get(&m);
                    let dot = ul[0] * k[0] as f64 + ul[1] * k[1] as f64;
                    acc[0] += dot * vm[0];
                    acc[1] += dot * vm[1];
                }
            }
            let kk = mode.norm_sq() as f64;
            let s = (acc[0] * k[0] as f64 + acc[1] * k[1] as f64) / kk;
            let want = [
                c(0.0, 1.0) * (acc[0] - s * k[0] as f64),
                c(0.0, 1.0) * (acc[1] - s * k[1] as f64),
            ];
            let got = b.coeff(idx);
            assert!((got[0] - want[0]).norm() < 1e-15 && (got[1] - want[1]).norm() < 1e-15);
        }
        // support is {±(1,1), ±(1,−1)}
        let support: Vec<_> = (0..b.len()).filter(|&i| b.magnitude(i) > 1e-15).collect();
        assert_eq!(support.len(), 2);
        assert_eq!(b.get(&[1, 1]), vec![c(0.0, 0.5), c(0.0, -0.5)]);
        assert_eq!(b.get(&[1, -1]), vec![c(0.0, -0.5), c(0.0, -0.5)]);
    }

    #[test]
    fn zero_operand_gives_zero() {
        let p = PhysicalParams::unit(3, 1.0).unwrap();
        let u = random_field(p, 3, [1.0, 3.0], 9, AmplitudeProfile::Flat).unwrap();
        let z = u.zeros_like();
        assert_eq!(bilinear_direct(&z, &u).unwrap().max_magnitude(), 0.0);
        assert_eq!(bilinear_direct(&u, &z).unwrap().max_magnitude(), 0.0);
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let u = taylor_green(p, 6, 1.0).unwrap();
        assert!(bilinear_direct(&u, &u).unwrap().max_magnitude() < 1e-15);
        assert!(bilinear_fft(&u, &u).unwrap().max_magnitude() < 1e-15);
    }

    #[test]
    fn fft_matches_direct_small() {
        for (dim, k) in [(2, 5), (3, 3)] {
            let p = PhysicalParams::new(dim, 2.5, 0.4).unwrap();
            let u = random_field(p, k, [1.0, k as f64], 21, AmplitudeProfile::Uniform).unwrap();
            let v = random_field(p, k, [1.0, k as f64], 22, AmplitudeProfile::Uniform).unwrap();
            let d = bilinear_direct(&u, &v).unwrap();
            let f = bilinear_fft(&u, &v).unwrap();
            assert!(d.max_abs_diff(&f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn mismatched_operands_fail() {
        let p = PhysicalParams::unit(2, 1.0).unwrap();
        let a = SpectralField::zeros(p, 3).unwrap();
        let b = SpectralField::zeros(p, 4).unwrap();
        assert!(bilinear_direct(&a, &b).is_err());
        assert!(bilinear_fft(&a, &b).is_err());
    }
}
