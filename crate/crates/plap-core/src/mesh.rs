//! One-dimensional meshes with geometric boundary grading.
//!
//! Singular problems develop boundary layers whose width is far below any
//! affordable uniform resolution, so the default mesh packs geometrically
//! growing cells against each Dirichlet boundary (ratio 1.15, smallest cell
//! at most 1e-8 of the domain length) and fills the middle uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::DomainSpec;

pub const DEFAULT_GRADING_RATIO: f64 = 1.15;
pub const DEFAULT_MIN_CELL_FRACTION: f64 = 1e-8;

/// Smallest cell of the geometric layout before construction.
fn predicted_h_min(length: f64, n: usize, ratio: f64, k: usize, sides: usize) -> f64 {
    if n < sides * k + 1 {
        return 0.0;
    }
    let geo_sum = (ratio.powi(k as i32) - 1.0) / (ratio - 1.0);
    let n_mid = n - sides * k;
    length / (sides as f64 * geo_sum + n_mid as f64 * ratio.powi(k as i32 - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    Geometric { ratio: f64, boundary_cells: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub nodes: Vec<f64>,
    pub grading: Grading,
    /// Dirichlet boundary present at the first / last node.
    pub dirichlet_lo: bool,
    pub dirichlet_hi: bool,
}

impl Mesh1D {
    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn cell_size(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// Uniform mesh with both ends Dirichlet.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Mesh1D> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidMesh(format!("need hi > lo and n >= 2, got [{lo}, {hi}], n={n}")));
        }
        let h = (hi - lo) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
        nodes[n] = hi;
        Ok(Mesh1D {
            nodes,
            grading: Grading::Uniform,
            dirichlet_lo: true,
            dirichlet_hi: true,
        })
    }

    /// Geometric grading with `boundary_cells` growing cells at each graded
    /// end and a uniform middle. `grade_lo`/`grade_hi` select which ends are
    /// refined (a Dirichlet layer is only present where the boundary is).
    pub fn geometric(
        lo: f64,
        hi: f64,
        n: usize,
        ratio: f64,
        boundary_cells: usize,
        grade_lo: bool,
        grade_hi: bool,
    ) -> Result<Mesh1D> {
        if !(hi > lo) {
            return Err(Error::InvalidMesh(format!("need hi > lo, got [{lo}, {hi}]")));
        }
        if !(ratio > 1.0 && ratio <= 2.0) {
            return Err(Error::InvalidMesh(format!("grading ratio must lie in (1, 2], got {ratio}")));
        }
        let sides = grade_lo as usize + grade_hi as usize;
        if sides == 0 {
            return Err(Error::InvalidMesh("geometric grading needs at least one graded end".into()));
        }
        let k = boundary_cells;
        if k == 0 || n < sides * k + 1 {
            return Err(Error::InvalidMesh(format!(
                "cell budget too small: n={n}, boundary_cells={k}, graded ends={sides}"
            )));
        }
        let length = hi - lo;
        // geometric sum per graded side plus uniform middle at the largest
        // graded cell size fixes the smallest cell
        let geo_sum = (ratio.powi(k as i32) - 1.0) / (ratio - 1.0);
        let n_mid = n - sides * k;
        let denom = sides as f64 * geo_sum + n_mid as f64 * ratio.powi(k as i32 - 1);
        let h_min = length / denom;
        let h_mid = h_min * ratio.powi(k as i32 - 1);

        let mut cells = Vec::with_capacity(n);
        if grade_lo {
            for i in 0..k {
                cells.push(h_min * ratio.powi(i as i32));
            }
        }
        for _ in 0..n_mid {
            cells.push(h_mid);
        }
        if grade_hi {
            for i in (0..k).rev() {
                cells.push(h_min * ratio.powi(i as i32));
            }
        }
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(lo);
        let mut acc = lo;
        for h in &cells {
            acc += h;
            nodes.push(acc);
        }
        // absorb the accumulated rounding in the largest cell rather than
        // the snapped last (tiny) one
        let widest = (0..n)
            .max_by(|&a, &b| cells[a].partial_cmp(&cells[b]).unwrap())
            .unwrap();
        let err = hi - nodes[n];
        for node in nodes.iter_mut().skip(widest + 1) {
            *node += err;
        }
        nodes[n] = hi;
        if grade_lo && grade_hi {
            // exact mirror symmetry
            for i in 0..(n + 1) / 2 {
                nodes[n - i] = hi - (nodes[i] - lo);
            }
            if n % 2 == 0 {
                nodes[n / 2] = lo + 0.5 * (hi - lo);
            }
        }
        let mesh = Mesh1D {
            nodes,
            grading: Grading::Geometric { ratio, boundary_cells: k },
            dirichlet_lo: true,
            dirichlet_hi: true,
        };
        mesh.check_strictly_increasing()?;
        Ok(mesh)
    }

    /// Default graded mesh for a radial/1d domain: ratio 1.15, smallest
    /// boundary cell at most 1e-8 of the length, graded only toward the
    /// Dirichlet ends (a ball center gets no layer).
    pub fn graded_for(domain: &DomainSpec, n: usize) -> Result<Mesh1D> {
        let (lo, hi, dir_lo, dir_hi) = domain
            .radial_range()
            .ok_or_else(|| Error::InvalidMesh("domain is not 1d/radial".into()))?;
        let ratio = DEFAULT_GRADING_RATIO;
        let sides = dir_lo as usize + dir_hi as usize;
        // smallest k whose graded profile reaches the target smallest cell
        let mut k = 1usize;
        loop {
            let geo_sum = (ratio.powi(k as i32) - 1.0) / (ratio - 1.0);
            if n <= sides * k + sides * k {
                break;
            }
            let n_mid = n - sides * k;
            let denom = sides as f64 * geo_sum + n_mid as f64 * ratio.powi(k as i32 - 1);
            if 1.0 / denom <= DEFAULT_MIN_CELL_FRACTION {
                break;
            }
            k += 1;
        }
        let mut mesh = Mesh1D::geometric(lo, hi, n, ratio, k, dir_lo, dir_hi)?;
        mesh.dirichlet_lo = dir_lo;
        mesh.dirichlet_hi = dir_hi;
        Ok(mesh)
    }

    /// Mesh from explicit nodes (used for resampled/synthetic fields).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Mesh1D> {
        let mesh = Mesh1D {
            nodes,
            grading: Grading::Uniform,
            dirichlet_lo: true,
            dirichlet_hi: true,
        };
        mesh.check_strictly_increasing()?;
        Ok(mesh)
    }

    /// Same grading rule with every cell budget doubled; used by the
    /// refinement studies.
    pub fn refined(&self) -> Result<Mesh1D> {
        match self.grading {
            Grading::Uniform => {
                let mut m = Mesh1D::uniform(self.lo(), self.hi(), 2 * self.n_cells())?;
                m.dirichlet_lo = self.dirichlet_lo;
                m.dirichlet_hi = self.dirichlet_hi;
                Ok(m)
            }
            Grading::Geometric { ratio, boundary_cells } => {
                let n2 = 2 * self.n_cells();
                let (glo, ghi) = (self.graded_lo(), self.graded_hi());
                let sides = glo as usize + ghi as usize;
                // doubling the boundary-cell count must not push the smallest
                // cell below f64 node resolution next to the boundary
                let floor = 32.0
                    * f64::EPSILON
                    * self.hi().abs().max(self.lo().abs()).max(self.length());
                let mut k2 = 2 * boundary_cells;
                while k2 > boundary_cells
                    && predicted_h_min(self.length(), n2, ratio, k2, sides) < floor
                {
                    k2 -= 1;
                }
                let mut m = Mesh1D::geometric(self.lo(), self.hi(), n2, ratio, k2, glo, ghi)?;
                m.dirichlet_lo = self.dirichlet_lo;
                m.dirichlet_hi = self.dirichlet_hi;
                Ok(m)
            }
        }
    }

    fn graded_lo(&self) -> bool {
        // a graded end starts with a cell much smaller than the median
        let h0 = self.cell_size(0);
        h0 < 0.5 * self.median_cell()
    }

    fn graded_hi(&self) -> bool {
        let hn = self.cell_size(self.n_cells() - 1);
        hn < 0.5 * self.median_cell()
    }

    fn median_cell(&self) -> f64 {
        let mut hs: Vec<f64> = (0..self.n_cells()).map(|j| self.cell_size(j)).collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hs[hs.len() / 2]
    }

    fn check_strictly_increasing(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidMesh("mesh needs at least two nodes".into()));
        }
        for j in 0..self.n_cells() {
            if !(self.nodes[j + 1] > self.nodes[j]) {
                return Err(Error::InvalidMesh(format!(
                    "nodes not strictly increasing at index {j}"
                )));
            }
        }
        Ok(())
    }

    /// Index of the cell containing x (clamped to the mesh range).
    pub fn cell_of(&self, x: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|n| n.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.n_cells() - 1),
            Err(i) => i.clamp(1, self.n_cells()) - 1,
        }
    }

    /// Quadratic interpolation of nodal data at x, using the 3-node stencil
    /// around the containing cell (falls back to linear on 2-node meshes).
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let j = self.cell_of(x);
        if self.nodes.len() == 2 {
            let t = (x - self.nodes[0]) / (self.nodes[1] - self.nodes[0]);
            return values[0] * (1.0 - t) + values[1] * t;
        }
        // pick stencil {j-1, j, j+1} or {j, j+1, j+2}, whichever brackets x
        // more centrally
        let i0 = if j == 0 {
            0
        } else if j + 1 == self.n_cells() {
            j - 1
        } else {
            let mid = 0.5 * (self.nodes[j] + self.nodes[j + 1]);
            if x < mid { j - 1 } else { j }
        };
        let (x0, x1, x2) = (self.nodes[i0], self.nodes[i0 + 1], self.nodes[i0 + 2]);
        let (y0, y1, y2) = (values[i0], values[i0 + 1], values[i0 + 2]);
        let l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
        y0 * l0 + y1 * l1 + y2 * l2
    }

    /// Nodal derivative of nodal data: 3-point second-order stencils on the
    /// nonuniform mesh, one-sided at the ends.
    pub fn gradient_of(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n_cells();
        let mut g = vec![0.0; n + 1];
        for i in 1..n {
            let hl = self.cell_size(i - 1);
            let hr = self.cell_size(i);
            g[i] = -hr / (hl * (hl + hr)) * values[i - 1]
                + (hr - hl) / (hl * hr) * values[i]
                + hl / (hr * (hl + hr)) * values[i + 1];
        }
        let (h0, h1) = (self.cell_size(0), self.cell_size(1));
        g[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * values[0]
            + (h0 + h1) / (h0 * h1) * values[1]
            - h0 / (h1 * (h0 + h1)) * values[2];
        let (hm, hn_) = (self.cell_size(n - 2), self.cell_size(n - 1));
        g[n] = (2.0 * hn_ + hm) / (hn_ * (hn_ + hm)) * values[n]
            - (hn_ + hm) / (hn_ * hm) * values[n - 1]
            + hn_ / (hm * (hn_ + hm)) * values[n - 2];
        g
    }

    /// Lumped "mass" of interior node i with weight r^k: the measure of the
    /// two half-cells around it, midpoint-weighted.
    pub fn lumped_mass(&self, weight_exp: f64) -> Vec<f64> {
        let n = self.n_cells();
        let w = |j: usize| -> f64 {
            let mid = 0.5 * (self.nodes[j] + self.nodes[j + 1]);
            if weight_exp == 0.0 { 1.0 } else { mid.powf(weight_exp) }
        };
        let mut m = vec![0.0; n + 1];
        m[0] = 0.5 * w(0) * self.cell_size(0);
        for i in 1..n {
            m[i] = 0.5 * (w(i - 1) * self.cell_size(i - 1) + w(i) * self.cell_size(i));
        }
        m[n] = 0.5 * w(n - 1) * self.cell_size(n - 1);
        m
    }

    /// Midpoint weight r^k per cell.
    pub fn cell_weights(&self, weight_exp: f64) -> Vec<f64> {
        (0..self.n_cells())
            .map(|j| {
                let mid = 0.5 * (self.nodes[j] + self.nodes[j + 1]);
                if weight_exp == 0.0 { 1.0 } else { mid.powf(weight_exp) }
            })
            .collect()
    }
}
