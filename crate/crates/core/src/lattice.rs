//! Integer wave vectors and the truncated half-lattice used to store fields.
//!
//! A field on the box `|k|_∞ ≤ K` is stored on the half of the box whose
//! first nonzero component is positive; the partner `-k` is implicit and
//! carries the complex-conjugate coefficient.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveVector {
    comps: [i32; 3],
    dim: u8,
    norm_sq: i64,
    max_norm: i32,
}

impl WaveVector {
    pub fn new(comps: &[i32]) -> Result<Self> {
        if comps.len() != 2 && comps.len() != 3 {
            return Err(Error::arg(format!(
                "wave vector must have 2 or 3 components, got {}",
                comps.len()
            )));
        }
        let mut c = [0i32; 3];
        c[..comps.len()].copy_from_slice(comps);
        Ok(Self::from_array(c, comps.len()))
    }

    fn from_array(comps: [i32; 3], dim: usize) -> Self {
        let norm_sq = comps[..dim].iter().map(|&x| (x as i64) * (x as i64)).sum();
        let max_norm = comps[..dim].iter().map(|x| x.abs()).max().unwrap_or(0);
        Self {
            comps,
            dim: dim as u8,
            norm_sq,
            max_norm,
        }
    }

    pub fn components(&self) -> &[i32] {
        &self.comps[..self.dim as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Exact squared euclidean norm.
    pub fn norm_sq(&self) -> i64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq as f64).sqrt()
    }

    pub fn max_norm(&self) -> i32 {
        self.max_norm
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq == 0
    }

    pub fn neg(&self) -> Self {
        let mut c = self.comps;
        c.iter_mut().for_each(|x| *x = -*x);
        Self { comps: c, ..*self }
    }

    /// True for the representative of a `±k` pair: first nonzero component positive.
    pub fn is_canonical(&self) -> bool {
        self.components()
            .iter()
            .find(|&&x| x != 0)
            .is_some_and(|&x| x > 0)
    }
}

/// Where a lattice point lives in half-lattice storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Origin,
    Stored(usize),
    /// Implicit partner of the stored mode at this index (conjugate coefficient).
    Partner(usize),
}

#[derive(Debug)]
pub struct Lattice {
    dim: usize,
    k_max: i32,
    modes: Vec<WaveVector>,
    norms: Vec<f64>,
    lookup: Vec<i32>,
}

type LatticeCache = HashMap<(usize, i32), Arc<Lattice>>;

impl Lattice {
    pub fn new(dim: usize, k_max: i32) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::arg(format!("lattice dimension must be 2 or 3, got {dim}")));
        }
        if k_max < 1 {
            return Err(Error::arg(format!("truncation K must be ≥ 1, got {k_max}")));
        }
        let side = (2 * k_max + 1) as usize;
        let total = side.pow(dim as u32);
        let mut modes = Vec::with_capacity(total / 2);
        for flat in 0..total {
            let mut c = [0i32; 3];
            let mut rem = flat;
            for j in (0..dim).rev() {
                c[j] = (rem % side) as i32 - k_max;
                rem /= side;
            }
            let kv = WaveVector::from_array(c, dim);
            if kv.is_canonical() {
                modes.push(kv);
            }
        }
        modes.sort_by(|a, b| {
            a.norm_sq
                .cmp(&b.norm_sq)
                .then_with(|| a.components().cmp(b.components()))
        });
        let norms = modes.iter().map(|m| m.norm()).collect();
        let mut lattice = Self {
            dim,
            k_max,
            modes,
            norms,
            lookup: vec![0; total],
        };
        for i in 0..lattice.modes.len() {
            let kv = lattice.modes[i];
            let a = lattice.dense_index(kv.components()).expect("in box");
            let b = lattice.dense_index(kv.neg().components()).expect("in box");
            lattice.lookup[a] = i as i32 + 1;
            lattice.lookup[b] = -(i as i32 + 1);
        }
        Ok(lattice)
    }

    /// Process-wide shared lattice for `(dim, K)`.
    pub fn shared(dim: usize, k_max: i32) -> Result<Arc<Lattice>> {
        static CACHE: OnceLock<Mutex<LatticeCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("lattice cache poisoned");
        if let Some(l) = guard.get(&(dim, k_max)) {
            return Ok(Arc::clone(l));
        }
        let l = Arc::new(Lattice::new(dim, k_max)?);
        guard.insert((dim, k_max), Arc::clone(&l));
        Ok(l)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// Number of stored (canonical) modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[WaveVector] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &WaveVector {
        &self.modes[i]
    }

    /// Euclidean norms `|k|` of the stored modes, in storage order (ascending).
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn side(&self) -> usize {
        (2 * self.k_max + 1) as usize
    }

    /// Row-major index of `k` in the full box, or `None` outside `|k|_∞ ≤ K`.
    pub fn dense_index(&self, k: &[i32]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let side = self.side();
        let mut idx = 0usize;
        for &c in k {
            if c.abs() > self.k_max {
                return None;
            }
            idx = idx * side + (c + self.k_max) as usize;
        }
        Some(idx)
    }

    /// Inverse of [`Lattice::dense_index`].
    pub fn dense_point(&self, mut idx: usize) -> [i32; 3] {
        let side = self.side();
        let mut c = [0i32; 3];
        for j in (0..self.dim).rev() {
            c[j] = (idx % side) as i32 - self.k_max;
            idx /= side;
        }
        c
    }

    pub fn slot_dense(&self, idx: usize) -> Slot {
        match self.lookup[idx] {
            0 => Slot::Origin,
            v if v > 0 => Slot::Stored(v as usize - 1),
            v => Slot::Partner((-v) as usize - 1),
        }
    }

    pub fn slot(&self, k: &[i32]) -> Option<Slot> {
        self.dense_index(k).map(|i| self.slot_dense(i))
    }

    pub fn dense_len(&self) -> usize {
        self.lookup.len()
    }
}
