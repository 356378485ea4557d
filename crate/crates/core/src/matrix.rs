//! Graded matrices: rectangular arrays of series over one chart with a
//! Z2^n degree attached to every row and column. Entry (i, j) is required
//! to be homogeneous of degree row_i + col_j.

use crate::calculus::partial_derivative;
use crate::chart::ChartRef;
use crate::coeff::{sample_points, EqOptions, Rat};
use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::series::Series;
use num_traits::{One, Zero};

#[derive(Debug, Clone)]
pub struct GradedMatrix {
    chart: ChartRef,
    row_degrees: Vec<Degree>,
    col_degrees: Vec<Degree>,
    entries: Vec<Vec<Series>>,
}

impl GradedMatrix {
    pub fn new(
        chart: &ChartRef,
        row_degrees: Vec<Degree>,
        col_degrees: Vec<Degree>,
        entries: Vec<Vec<Series>>,
    ) -> Result<GradedMatrix> {
        for d in row_degrees.iter().chain(&col_degrees) {
            if d.n() != chart.n() {
                return Err(Error::DimensionMismatch { expected: chart.n(), found: d.n() });
            }
        }
        if entries.len() != row_degrees.len() {
            return Err(Error::DimensionMismatch {
                expected: row_degrees.len(),
                found: entries.len(),
            });
        }
        for row in &entries {
            if row.len() != col_degrees.len() {
                return Err(Error::DimensionMismatch {
                    expected: col_degrees.len(),
                    found: row.len(),
                });
            }
            for e in row {
                if !e.chart().same_context(chart) {
                    return Err(chart.context_error(e.chart()));
                }
            }
        }
        Ok(GradedMatrix { chart: chart.clone(), row_degrees, col_degrees, entries })
    }

    pub fn identity(chart: &ChartRef, degrees: Vec<Degree>) -> Result<GradedMatrix> {
        let n = degrees.len();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Series::one(chart) } else { Series::zero(chart) })
                    .collect()
            })
            .collect();
        GradedMatrix::new(chart, degrees.clone(), degrees, entries)
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn rows(&self) -> usize {
        self.row_degrees.len()
    }

    pub fn cols(&self) -> usize {
        self.col_degrees.len()
    }

    pub fn row_degrees(&self) -> &[Degree] {
        &self.row_degrees
    }

    pub fn col_degrees(&self) -> &[Degree] {
        &self.col_degrees
    }

    pub fn entry(&self, i: usize, j: usize) -> &Series {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Series>] {
        &self.entries
    }

    /// Entry (i, j) must be homogeneous of degree row_i + col_j (zero
    /// entries are fine everywhere).
    pub fn check_degrees(&self) -> Result<()> {
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = self.row_degrees[i].sum(&self.col_degrees[j])?;
                if !e.degree_of().fits(&want) {
                    return Err(Error::Degree(format!(
                        "entry ({i}, {j}) must be homogeneous of degree {want}, got {e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedMatrix) -> Result<GradedMatrix> {
        self.require_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(ra, rb)| {
                ra.iter().zip(rb).map(|(a, b)| a.add(b)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GradedMatrix::new(&self.chart, self.row_degrees.clone(), self.col_degrees.clone(), entries)
    }

    pub fn neg(&self) -> GradedMatrix {
        GradedMatrix {
            chart: self.chart.clone(),
            row_degrees: self.row_degrees.clone(),
            col_degrees: self.col_degrees.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|e| e.neg()).collect())
                .collect(),
        }
    }

    pub fn sub(&self, other: &GradedMatrix) -> Result<GradedMatrix> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> GradedMatrix {
        GradedMatrix {
            chart: self.chart.clone(),
            row_degrees: self.row_degrees.clone(),
            col_degrees: self.col_degrees.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|e| e.scale(c)).collect())
                .collect(),
        }
    }

    /// Matrix product; the left factor's entries multiply from the left,
    /// which matters because entries need not commute.
    pub fn mul(&self, other: &GradedMatrix) -> Result<GradedMatrix> {
        if !self.chart.same_context(&other.chart) {
            return Err(self.chart.context_error(&other.chart));
        }
        if self.col_degrees != other.row_degrees {
            return Err(Error::Degree(
                "inner degree lists do not match in matrix product".into(),
            ));
        }
        let entries = raw_mul(&self.chart, &self.entries, &other.entries)?;
        GradedMatrix::new(&self.chart, self.row_degrees.clone(), other.col_degrees.clone(), entries)
    }

    /// Pull every entry back along a morphism into its source chart.
    pub fn pullback(&self, phi: &Morphism) -> Result<GradedMatrix> {
        if !self.chart.same_context(phi.target()) {
            return Err(self.chart.context_error(phi.target()));
        }
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|e| phi.apply_pullback(e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        GradedMatrix::new(
            phi.source(),
            self.row_degrees.clone(),
            self.col_degrees.clone(),
            entries,
        )
    }

    /// Swap the index layout (rows become columns) without any sign rule;
    /// this is bookkeeping, not a graded transpose.
    pub fn layout_swapped(&self) -> GradedMatrix {
        let entries = (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.entries[i][j].clone()).collect())
            .collect();
        GradedMatrix {
            chart: self.chart.clone(),
            row_degrees: self.col_degrees.clone(),
            col_degrees: self.row_degrees.clone(),
            entries,
        }
    }

    /// The degree-0 parts as exact rationals; errors when an entry's
    /// degree-0 part is opaque or not constant.
    pub fn body_rat(&self) -> Result<Vec<Vec<Rat>>> {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| {
                        e.body().as_constant().ok_or_else(|| {
                            Error::Capability(
                                "matrix degree-0 part is not a rational constant".into(),
                            )
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// The degree-0 parts evaluated at a real point of the chart.
    pub fn body_at(&self, xs: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|e| e.body().eval(xs)).collect())
            .collect()
    }

    /// Is the degree-0 part invertible: exactly when it is constant
    /// rational, otherwise at every sample point of the domain.
    pub fn body_invertible_on(&self, domain: &[(f64, f64)], opts: &EqOptions) -> Result<bool> {
        if self.rows() != self.cols() {
            return Ok(false);
        }
        if let Ok(b) = self.body_rat() {
            return Ok(invert_rat_matrix(&b).is_some());
        }
        for pt in sample_points(domain, opts) {
            let b = self.body_at(&pt)?;
            if rank_f64(&b, opts.tol) < self.rows() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Invert a square matrix whose degree-0 part is a constant rational
    /// matrix B: with M = B (I + K) and K strictly formal (hence nilpotent
    /// at the truncation order), M^-1 = (sum_k (-K)^k) B^-1.
    pub fn invert(&self) -> Result<GradedMatrix> {
        if self.rows() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                found: self.cols(),
            });
        }
        let n = self.rows();
        let b = self.body_rat()?;
        let b_inv = invert_rat_matrix(&b).ok_or_else(|| {
            Error::SingularBody("degree-0 part of the matrix is singular".into())
        })?;
        let b_inv_series: Vec<Vec<Series>> = b_inv
            .iter()
            .map(|r| r.iter().map(|c| Series::constant(&self.chart, c.clone())).collect())
            .collect();
        let f: Vec<Vec<Series>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|e| e.formal_part()).collect())
            .collect();
        let k = raw_mul(&self.chart, &b_inv_series, &f)?;
        let neg_k: Vec<Vec<Series>> =
            k.iter().map(|r| r.iter().map(|e| e.neg()).collect()).collect();
        let mut acc = raw_identity(&self.chart, n);
        let mut term = raw_identity(&self.chart, n);
        for _ in 0..self.chart.truncation() {
            term = raw_mul(&self.chart, &term, &neg_k)?;
            if term.iter().all(|r| r.iter().all(|e| e.is_structural_zero())) {
                break;
            }
            acc = raw_add(&acc, &term)?;
        }
        let entries = raw_mul(&self.chart, &acc, &b_inv_series)?;
        GradedMatrix::new(
            &self.chart,
            self.col_degrees.clone(),
            self.row_degrees.clone(),
            entries,
        )
    }

    pub fn eq_up_to(
        &self,
        other: &GradedMatrix,
        order: usize,
        domain: Option<&[(f64, f64)]>,
        opts: &EqOptions,
    ) -> Result<bool> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Ok(false);
        }
        for (ra, rb) in self.entries.iter().zip(&other.entries) {
            for (a, b) in ra.iter().zip(rb) {
                if !a.eq_up_to(b, order, domain, opts)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn exact_eq(&self, other: &GradedMatrix) -> Option<bool> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Some(false);
        }
        let mut all = true;
        for (ra, rb) in self.entries.iter().zip(&other.entries) {
            for (a, b) in ra.iter().zip(rb) {
                match a.exact_eq(b) {
                    Some(true) => {}
                    Some(false) => all = false,
                    None => return None,
                }
            }
        }
        Some(all)
    }

    pub fn is_identity_exact(&self) -> Option<bool> {
        if self.rows() != self.cols() {
            return Some(false);
        }
        GradedMatrix::identity(&self.chart, self.row_degrees.clone())
            .ok()
            .and_then(|id| self.exact_eq(&id))
    }

    fn require_same_shape(&self, other: &GradedMatrix) -> Result<()> {
        if !self.chart.same_context(&other.chart) {
            return Err(self.chart.context_error(&other.chart));
        }
        if self.row_degrees != other.row_degrees || self.col_degrees != other.col_degrees {
            return Err(Error::Degree("matrix shapes do not match".into()));
        }
        Ok(())
    }
}

fn raw_identity(chart: &ChartRef, n: usize) -> Vec<Vec<Series>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Series::one(chart) } else { Series::zero(chart) })
                .collect()
        })
        .collect()
}

fn raw_add(a: &[Vec<Series>], b: &[Vec<Series>]) -> Result<Vec<Vec<Series>>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect())
        .collect()
}

fn raw_mul(chart: &ChartRef, a: &[Vec<Series>], b: &[Vec<Series>]) -> Result<Vec<Vec<Series>>> {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = Vec::with_capacity(a.len());
    for ra in a {
        if ra.len() != inner {
            return Err(Error::DimensionMismatch { expected: inner, found: ra.len() });
        }
        let mut row = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = Series::zero(chart);
            for (k, ak) in ra.iter().enumerate() {
                acc = acc.add(&ak.mul(&b[k][j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

/// Exact Gauss-Jordan inverse of a rational matrix; None when singular.
pub fn invert_rat_matrix(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let av = &a[col][j] * &f;
                a[r][j] = &a[r][j] - &av;
                let iv = &inv[col][j] * &f;
                inv[r][j] = &inv[r][j] - &iv;
            }
        }
    }
    Some(inv)
}

/// Numeric rank by Gaussian elimination with partial pivoting; entries
/// below `tol` (relative to the largest initial entry) count as zero.
pub fn rank_f64(m: &[Vec<f64>], tol: f64) -> usize {
    if m.is_empty() || m[0].is_empty() {
        return 0;
    }
    let rows = m.len();
    let cols = m[0].len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(1.0_f64, f64::max);
    let cut = tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let (best, best_val) = (row..rows)
            .map(|r| (r, a[r][col].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val <= cut {
            continue;
        }
        a.swap(row, best);
        for r in (row + 1)..rows {
            let f = a[r][col] / a[row][col];
            for c in col..cols {
                a[r][c] -= f * a[row][c];
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

impl Morphism {
    /// The matrix of partial derivatives: rows indexed by target
    /// coordinates, columns by source coordinates, entry (B, A) the left
    /// partial of the B-th image along the A-th source coordinate. Entry
    /// (B, A) is homogeneous of degree deg(y_B) + deg(x_A).
    pub fn jacobian(&self) -> Result<GradedMatrix> {
        let src = self.source();
        let tgt = self.target();
        let row_degrees: Vec<Degree> =
            tgt.coord_ids().map(|id| tgt.coord_degree(id)).collect();
        let col_degrees: Vec<Degree> =
            src.coord_ids().map(|id| src.coord_degree(id)).collect();
        let mut entries = Vec::with_capacity(row_degrees.len());
        for id in tgt.coord_ids() {
            let img = self.image(id);
            let mut row = Vec::with_capacity(col_degrees.len());
            for a in src.coord_ids() {
                row.push(partial_derivative(img, a)?);
            }
            entries.push(row);
        }
        GradedMatrix::new(src, row_degrees, col_degrees, entries)
    }
}
