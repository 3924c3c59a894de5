use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::besov::SmoothFunction;
use crate::divdiff::{integrate_with, PeanoKernel};
use crate::error::{Error, Result};
use crate::par;

/// Signed measure on ℝ: weighted atoms plus weighted unit-integral B-splines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftMeasure {
    atoms: Vec<(f64, f64)>,
    splines: Vec<(PeanoKernel, f64)>,
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

impl ShiftMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn splines(&self) -> &[(PeanoKernel, f64)] {
        &self.splines
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.splines.is_empty()
    }

    pub fn push_atom(&mut self, loc: f64, weight: f64) {
        if weight != 0.0 {
            self.atoms.push((loc, weight));
        }
    }

    /// Adds a kernel; atom kernels are stored as atoms.
    pub fn push_kernel(&mut self, kernel: PeanoKernel, weight: f64) {
        if weight == 0.0 {
            return;
        }
        if kernel.is_atom() {
            self.atoms.push((kernel.knots()[0], weight));
        } else {
            self.splines.push((kernel, weight));
        }
    }

    /// Appends `factor · other`.
    pub fn add_scaled(&mut self, other: &ShiftMeasure, factor: f64) {
        for &(x, w) in &other.atoms {
            self.push_atom(x, factor * w);
        }
        for (k, w) in &other.splines {
            if factor * w != 0.0 {
                self.splines.push((k.clone(), factor * w));
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, factor);
        out
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: Vec<f64> = self.atoms.iter().map(|a| a.1).collect();
        let splines: Vec<f64> = self.splines.iter().map(|s| s.1).collect();
        par::pairwise_sum(&atoms) + par::pairwise_sum(&splines)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `Σ |weights|`, an upper bound for the total variation.
    pub fn weight_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.1.abs()).sum::<f64>()
            + self.splines.iter().map(|s| s.1.abs()).sum::<f64>()
    }

    /// Fraction of `Σ |weights|` carried by atoms; zero for the zero measure.
    pub fn atom_fraction(&self) -> f64 {
        let total = self.weight_norm();
        if total == 0.0 {
            0.0
        } else {
            self.atoms.iter().map(|a| a.1.abs()).sum::<f64>() / total
        }
    }

    /// Smallest interval containing every atom and kernel support.
    pub fn support(&self) -> Option<(f64, f64)> {
        let points =
            self.atoms
                .iter()
                .flat_map(|a| [a.0, a.0])
                .chain(self.splines.iter().flat_map(|(k, _)| {
                    let (lo, hi) = k.support();
                    [lo, hi]
                }));
        points.fold(None, |acc, x| match acc {
            None => Some((x, x)),
            Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
        })
    }

    /// Sums the weights of atoms closer than `tol` and of splines with identical
    /// knots, then drops zero weights. The result is in sorted order.
    pub fn merged(&self, tol: f64) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged_atoms: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < atoms.len() {
            let start = atoms[i].0;
            let mut j = i;
            let (mut loc_sum, mut weight) = (0.0, 0.0);
            while j < atoms.len() && atoms[j].0 - start <= tol {
                loc_sum += atoms[j].0;
                weight += atoms[j].1;
                j += 1;
            }
            if weight != 0.0 {
                merged_atoms.push((loc_sum / (j - i) as f64, weight));
            }
            i = j;
        }

        let mut splines = self.splines.clone();
        splines.sort_by(|a, b| lexicographic(a.0.knots(), b.0.knots()).then(a.1.total_cmp(&b.1)));
        let mut merged_splines: Vec<(PeanoKernel, f64)> = Vec::new();
        for (k, w) in splines {
            match merged_splines.last_mut() {
                Some((last, lw)) if last.knots() == k.knots() => *lw += w,
                _ => merged_splines.push((k, w)),
            }
        }
        merged_splines.retain(|s| s.1 != 0.0);
        Self {
            atoms: merged_atoms,
            splines: merged_splines,
        }
    }

    /// Drops the atoms and keeps the spline part.
    pub fn without_atoms(&self) -> Self {
        Self {
            atoms: Vec::new(),
            splines: self.splines.clone(),
        }
    }
}

/// `∫ g dμ` over atoms and splines.
pub fn integrate(measure: &ShiftMeasure, g: &SmoothFunction) -> f64 {
    integrate_fn(measure, |x| g.eval(x))
}

fn integrate_fn<F: Fn(f64) -> f64 + Sync + Send>(measure: &ShiftMeasure, g: F) -> f64 {
    let atoms: Vec<f64> = measure.atoms.iter().map(|&(x, w)| w * g(x)).collect();
    let splines = par::map_slice(&measure.splines, |(k, w)| w * integrate_with(k, &g));
    par::pairwise_sum(&atoms) + par::pairwise_sum(&splines)
}

/// `bins` equal cells over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

pub const DEFAULT_BINS: usize = 2048;

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || bins == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid needs lo < hi and bins > 0, got {lo}:{hi}:{bins}"
            )));
        }
        Ok(Self { lo, hi, bins })
    }

    /// `[λ_min - ‖K‖ - 1, λ_max + m‖K‖ + 1]` with the default bin count.
    pub fn covering(eigenvalues: &[f64], k_norm: f64, m: usize) -> Self {
        let lmin = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let lmax = eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            lo: lmin - k_norm - 1.0,
            hi: lmax + m as f64 * k_norm + 1.0,
            bins: DEFAULT_BINS,
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edge(&self, i: usize) -> f64 {
        if i == self.bins {
            self.hi
        } else {
            self.lo + i as f64 * self.width()
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|i| 0.5 * (self.edge(i) + self.edge(i + 1)))
            .collect()
    }

    /// Index of the bin containing `x`; the right end belongs to the last bin.
    fn bin_of(&self, x: f64) -> usize {
        (((x - self.lo) / self.width()).floor().max(0.0) as usize).min(self.bins - 1)
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        lo >= self.lo && hi <= self.hi
    }
}

/// Bin-averaged density from exact kernel masses per bin; atoms are deposited
/// into the bin that contains them.
pub fn grid_density(measure: &ShiftMeasure, grid: &UniformGrid) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = measure.support() {
        if !grid.covers(lo, hi) {
            return Err(Error::GridTooSmall {
                lo: grid.lo,
                hi: grid.hi,
                need_lo: lo,
                need_hi: hi,
            });
        }
    }
    let h = grid.width();
    let pieces = par::map_slice(&measure.splines, |(k, w)| {
        let (lo, hi) = k.support();
        let first = grid.bin_of(lo);
        let last = grid.bin_of(hi);
        let masses: Vec<f64> = (first..=last)
            .map(|b| w * k.mass_between(grid.edge(b), grid.edge(b + 1)))
            .collect();
        (first, masses)
    });
    let mut mass = vec![0.0; grid.bins];
    for (first, masses) in pieces {
        for (i, v) in masses.into_iter().enumerate() {
            mass[first + i] += v;
        }
    }
    for &(x, w) in &measure.atoms {
        mass[grid.bin_of(x)] += w;
    }
    Ok(mass.into_iter().map(|v| v / h).collect())
}


/// Comment lines, then `x,density` rows at the bin centers with 17 significant digits.
pub fn density_csv(
    measure: &ShiftMeasure,
    grid: &UniformGrid,
    header: &[String],
) -> Result<String> {
    let density = grid_density(measure, grid)?;
    let mut out = String::new();
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("x,density\n");
    for (x, d) in grid.centers().iter().zip(&density) {
        out.push_str(&format!("{x:.16e},{d:.16e}\n"));
    }
    Ok(out)
}

#[derive(Serialize)]
struct AtomRecord {
    loc: f64,
    weight: f64,
}

/// Atom sidecar: `[{"loc": x, "weight": w}, …]`.
pub fn atoms_json(measure: &ShiftMeasure) -> String {
    let atoms: Vec<AtomRecord> = measure
        .atoms
        .iter()
        .map(|&(loc, weight)| AtomRecord { loc, weight })
        .collect();
    serde_json::to_string_pretty(&atoms).expect("atoms serialize")
}
