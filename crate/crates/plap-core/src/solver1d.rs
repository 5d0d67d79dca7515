//! Regularized continuation solver for the radial/1d problem
//! `-(r^k |u'|^(p-2) u')' / r^k + θ|u'|^q = u^(-γ) + f(u)`, zero Dirichlet.
//!
//! The singular reaction is replaced by `(u+ε)^(-γ)` and ε driven down a
//! geometric schedule with warm starts; each step imposes the regularized
//! trace `u = ε^(p/(γ+p-1))` at Dirichlet nodes. Discretization is the
//! conservative vertex-centered scheme: exact P1 fluxes, lumped reaction
//! terms, 3-point second-order gradient sampling for the non-variational
//! θ|u'|^q term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FailedIterate, Result};
use crate::field::{ContinuationStep, SolutionField, SolveMeta};
use crate::linalg::BandMatrix;
use crate::mesh::Mesh1D;
use crate::problem::{ReactionSpec, ValidatedProblem};

/// Discretization of the non-variational gradient term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradScheme {
    /// 3-point second-order stencil (default; order verified on the
    /// gradient-term torsion oracle).
    Central,
    /// One-sided against the local slope sign.
    Upwind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub factor: f64,
    pub eps_min: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule { eps0: 1e-2, factor: 0.1, eps_min: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Initial line-search step.
    pub damping: f64,
    pub max_iter: usize,
    /// Convergence threshold on the scaled weak residual.
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { damping: 1.0, max_iter: 120, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub eps: EpsSchedule,
    pub newton: NewtonOptions,
    pub gradient_term: GradScheme,
    /// Test hook: drop the u^(-γ) term entirely (linear sanity problems).
    pub include_singular: bool,
    /// Coefficient M in M·u^(-γ); 1 for the main problem.
    pub singular_scale: f64,
    /// Reject iterates that lose interior positivity.
    pub require_positive: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps: EpsSchedule::default(),
            newton: NewtonOptions::default(),
            gradient_term: GradScheme::Central,
            include_singular: true,
            singular_scale: 1.0,
            require_positive: true,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        let EpsSchedule { eps0, factor, eps_min } = self.eps;
        if !(eps0 > eps_min && eps_min > 0.0) {
            return Err(Error::InvalidOptions(format!(
                "need eps0 > eps_min > 0, got eps0={eps0}, eps_min={eps_min}"
            )));
        }
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::InvalidOptions(format!("eps factor must lie in (0,1), got {factor}")));
        }
        if !(self.newton.tol > 0.0) {
            return Err(Error::InvalidOptions("newton tol must be positive".into()));
        }
        if !(self.singular_scale >= 0.0) {
            return Err(Error::InvalidOptions("singular scale must be nonnegative".into()));
        }
        Ok(())
    }
}

#[inline]
fn phi_p(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        s
    } else {
        s.abs().powf(p - 2.0) * s
    }
}

/// |s|^(p-2), the diffusion coefficient; the Jacobian floors this.
#[inline]
fn diff_coeff(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        s.abs().powf(p - 2.0)
    }
}

const JACOBIAN_FLOOR: f64 = 1e-14;
const MAX_HALVINGS: usize = 40;
/// Residuals within this many flux quanta of zero count as converged.
const QUANTIZATION_SLACK: f64 = 8.0;

struct NodalResidual {
    r: Vec<f64>,
    scale: Vec<f64>,
    quant: Vec<f64>,
}

/// The assembled problem on one mesh at one regularization level.
struct Disc<'a> {
    mesh: &'a Mesh1D,
    cell_w: Vec<f64>,
    mass: Vec<f64>,
    p: f64,
    gamma: f64,
    q: f64,
    theta: f64,
    eps: f64,
    sing_scale: f64,
    reaction: Option<&'a ReactionSpec>,
    /// Fixed nodal right-hand side (used by the eigen inner solves).
    rhs_nodal: Option<&'a [f64]>,
    grad_scheme: GradScheme,
    bc: f64,
    require_positive: bool,
}

impl<'a> Disc<'a> {
    fn n(&self) -> usize {
        self.mesh.n_cells()
    }

    fn unknown_range(&self) -> (usize, usize) {
        let lo = if self.mesh.dirichlet_lo { 1 } else { 0 };
        let hi = if self.mesh.dirichlet_hi { self.n() - 1 } else { self.n() };
        (lo, hi)
    }

    fn apply_bc(&self, u: &mut [f64]) {
        if self.mesh.dirichlet_lo {
            u[0] = self.bc;
        }
        if self.mesh.dirichlet_hi {
            u[self.n()] = self.bc;
        }
    }

    /// Gradient sample at node i for the θ-term. The non-Dirichlet end of a
    /// radial mesh is the symmetry axis where u'(0) = 0.
    fn du_at(&self, u: &[f64], i: usize) -> f64 {
        let n = self.n();
        if i == 0 || i == n {
            return 0.0;
        }
        let hl = self.mesh.cell_size(i - 1);
        let hr = self.mesh.cell_size(i);
        let central = -hr / (hl * (hl + hr)) * u[i - 1]
            + (hr - hl) / (hl * hr) * u[i]
            + hl / (hr * (hl + hr)) * u[i + 1];
        match self.grad_scheme {
            GradScheme::Central => central,
            GradScheme::Upwind => {
                if central >= 0.0 {
                    (u[i] - u[i - 1]) / hl
                } else {
                    (u[i + 1] - u[i]) / hr
                }
            }
        }
    }

    /// Raw weak residual per node (zero rows at Dirichlet nodes) plus the
    /// local magnitude used to scale it into a relative residual, plus the
    /// flux quantization level: the smallest representable change of the
    /// assembled flux difference under a one-ulp nodal perturbation. A row
    /// whose residual sits within a few quanta of zero cannot be improved
    /// in f64 and counts as converged.
    fn residual(&self, u: &[f64]) -> NodalResidual {
        let n = self.n();
        let mut r = vec![0.0; n + 1];
        let mut scale = vec![1.0; n + 1];
        let mut quant = vec![0.0; n + 1];
        let mut flux = vec![0.0; n];
        let mut flux_jump = vec![0.0; n];
        for j in 0..n {
            let h = self.mesh.cell_size(j);
            let s = (u[j + 1] - u[j]) / h;
            flux[j] = self.cell_w[j] * phi_p(s, self.p);
            let ds = f64::EPSILON * u[j].abs().max(u[j + 1].abs()).max(f64::MIN_POSITIVE) / h;
            flux_jump[j] = self.cell_w[j] * (phi_p(s.abs() + ds, self.p) - phi_p(s.abs(), self.p));
        }
        let (lo, hi) = self.unknown_range();
        for i in lo..=hi {
            let flux_in = if i == 0 { 0.0 } else { flux[i - 1] };
            let flux_out = if i == n { 0.0 } else { flux[i] };
            let du = self.du_at(u, i);
            let sing = if self.sing_scale > 0.0 {
                self.sing_scale * (u[i] + self.eps).powf(-self.gamma)
            } else {
                0.0
            };
            let f_val = self.reaction.map_or(0.0, |f| f.eval(u[i]));
            let rhs_fix = self.rhs_nodal.map_or(0.0, |r| r[i]);
            let grad_term = if self.theta > 0.0 {
                self.theta * du.abs().powf(self.q)
            } else {
                0.0
            };
            r[i] = (flux_in - flux_out) + self.mass[i] * (grad_term - sing - f_val - rhs_fix);
            scale[i] = self.mass[i] * (sing + f_val.abs() + rhs_fix.abs() + grad_term + 1.0);
            let jump_in = if i == 0 { 0.0 } else { flux_jump[i - 1] };
            let jump_out = if i == n { 0.0 } else { flux_jump[i] };
            quant[i] = jump_in + jump_out;
        }
        NodalResidual { r, scale, quant }
    }

    fn scaled_norm(&self, res: &NodalResidual) -> f64 {
        let (lo, hi) = self.unknown_range();
        let mut m: f64 = 0.0;
        for i in lo..=hi {
            if res.r[i].abs() <= QUANTIZATION_SLACK * res.quant[i] {
                continue;
            }
            m = m.max((res.r[i] / res.scale[i]).abs());
        }
        m
    }

    /// Tridiagonal Jacobian over the unknowns. `picard` lags the diffusion
    /// coefficient (drops the p-1 factor) and the gradient term.
    fn jacobian_mode(&self, u: &[f64], picard: bool) -> BandMatrix {
        let n = self.n();
        let (lo, hi) = self.unknown_range();
        let m = hi - lo + 1;
        let mut jac = BandMatrix::zeros(m, 1, 1);
        let col = |node: usize| node - lo;
        // flux derivatives; coefficient floored only here, never in the residual
        let dflux: Vec<f64> = (0..n)
            .map(|j| {
                let h = self.mesh.cell_size(j);
                let s = (u[j + 1] - u[j]) / h;
                let c = if picard {
                    diff_coeff(s, self.p)
                } else {
                    (self.p - 1.0) * diff_coeff(s, self.p)
                };
                self.cell_w[j] * c.max(JACOBIAN_FLOOR) / h
            })
            .collect();
        for i in lo..=hi {
            let row = col(i);
            let mut diag = 0.0;
            if i > 0 {
                diag += dflux[i - 1];
                if i - 1 >= lo {
                    jac.add(row, col(i - 1), -dflux[i - 1]);
                }
            }
            if i < n {
                diag += dflux[i];
                if i + 1 <= hi {
                    jac.add(row, col(i + 1), -dflux[i]);
                }
            }
            if self.sing_scale > 0.0 {
                diag += self.mass[i]
                    * self.sing_scale
                    * self.gamma
                    * (u[i] + self.eps).powf(-self.gamma - 1.0);
            }
            if let Some(f) = self.reaction {
                diag -= self.mass[i] * f.deriv(u[i]);
            }
            if self.theta > 0.0 && !picard && i > 0 && i < n {
                let du = self.du_at(u, i);
                let slope = self.q * du.abs().max(JACOBIAN_FLOOR).powf(self.q - 1.0) * du.signum();
                let w = self.mass[i] * self.theta * slope;
                let hl = self.mesh.cell_size(i - 1);
                let hr = self.mesh.cell_size(i);
                match self.grad_scheme {
                    GradScheme::Central => {
                        if i - 1 >= lo {
                            jac.add(row, col(i - 1), w * (-hr / (hl * (hl + hr))));
                        }
                        diag += w * ((hr - hl) / (hl * hr));
                        if i + 1 <= hi {
                            jac.add(row, col(i + 1), w * (hl / (hr * (hl + hr))));
                        }
                    }
                    GradScheme::Upwind => {
                        if du >= 0.0 {
                            if i - 1 >= lo {
                                jac.add(row, col(i - 1), -w / hl);
                            }
                            diag += w / hl;
                        } else {
                            diag -= w / hr;
                            if i + 1 <= hi {
                                jac.add(row, col(i + 1), w / hr);
                            }
                        }
                    }
                }
            }
            jac.add(row, row, diag);
        }
        jac
    }
}

struct NewtonStats {
    newton_iterations: usize,
    picard_iterations: usize,
    residual: f64,
}

fn newton_solve(disc: &Disc, u: &mut Vec<f64>, opts: &NewtonOptions) -> Result<NewtonStats> {
    let (lo, hi) = disc.unknown_range();
    disc.apply_bc(u);
    let mut picard = false;
    let mut stats = NewtonStats { newton_iterations: 0, picard_iterations: 0, residual: f64::NAN };
    let mut res = disc.residual(u);
    let mut rn = disc.scaled_norm(&res);
    let mut stall = 0usize;
    #[allow(clippy::used_underscore_binding)]
    for _it in 0..opts.max_iter {
        if rn <= opts.tol {
            stats.residual = rn;
            return Ok(stats);
        }
        let jac = disc.jacobian_mode(u, picard);
        let lu = jac.lu_factor().map_err(|_| no_convergence(disc, u, &stats, rn))?;
        let mut delta: Vec<f64> = (lo..=hi).map(|i| -res.r[i]).collect();
        lu.solve(&mut delta);
        if picard {
            stats.picard_iterations += 1;
        } else {
            stats.newton_iterations += 1;
        }

        let mut alpha = opts.damping;
        let mut accepted = false;
        let mut positivity_blocked_node = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = u.clone();
            for i in lo..=hi {
                trial[i] += alpha * delta[i - lo];
            }
            if disc.require_positive {
                if let Some(k) = (lo..=hi).find(|&i| trial[i] <= 0.0) {
                    positivity_blocked_node = Some(k);
                    alpha *= 0.5;
                    continue;
                }
            }
            let mut res_t = disc.residual(&trial);
            // frozen scale/quantization during the line search
            res_t.scale = res.scale.clone();
            res_t.quant = res.quant.clone();
            let rn_t = disc.scaled_norm(&res_t);
            if std::env::var_os("PLAP_SOLVER_TRACE").is_some() {
                eprintln!(
                    "  it={_it} picard={picard} alpha={alpha:.3e} rn={rn:.6e} rn_t={rn_t:.6e}"
                );
            }
            if rn_t.is_finite() && rn_t <= (1.0 - 1e-4 * alpha) * rn {
                *u = trial;
                res = disc.residual(u);
                rn = disc.scaled_norm(&res);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if !picard {
                // Newton direction unusable: lag the coefficients instead
                picard = true;
                stall = 0;
                continue;
            }
            if let Some(node) = positivity_blocked_node {
                return Err(Error::NegativeIterate { node });
            }
            return Err(no_convergence(disc, u, &stats, rn));
        }
        // slow Newton progress also triggers the Picard fallback
        if !picard {
            if alpha < 0.51 * opts.damping {
                stall += 1;
            } else {
                stall = 0;
            }
            if stall >= 8 {
                picard = true;
            }
        }
    }
    if rn <= opts.tol {
        stats.residual = rn;
        return Ok(stats);
    }
    Err(no_convergence(disc, u, &stats, rn))
}

fn no_convergence(disc: &Disc, u: &[f64], stats: &NewtonStats, rn: f64) -> Error {
    Error::NoConvergence {
        iterations: stats.newton_iterations + stats.picard_iterations,
        residual: rn,
        eps: disc.eps,
        last: Box::new(FailedIterate {
            values: u.to_vec(),
            residual: rn,
            eps: disc.eps,
            iterations: stats.newton_iterations + stats.picard_iterations,
        }),
    }
}

fn check_mesh_matches(problem: &ValidatedProblem, mesh: &Mesh1D) -> Result<()> {
    let (lo, hi, dlo, dhi) = problem
        .spec
        .domain
        .radial_range()
        .ok_or_else(|| Error::InvalidDomain("solve_radial needs a 1d/radial domain".into()))?;
    let tol = 1e-12 * (hi - lo).max(1.0);
    if (mesh.lo() - lo).abs() > tol
        || (mesh.hi() - hi).abs() > tol
        || mesh.dirichlet_lo != dlo
        || mesh.dirichlet_hi != dhi
    {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

/// Distance of each node to the nearest Dirichlet end.
fn node_distances(mesh: &Mesh1D) -> Vec<f64> {
    mesh.nodes
        .iter()
        .map(|&x| {
            let dl = if mesh.dirichlet_lo { x - mesh.lo() } else { f64::INFINITY };
            let dh = if mesh.dirichlet_hi { mesh.hi() - x } else { f64::INFINITY };
            dl.min(dh)
        })
        .collect()
}

/// Solves the regularized problem down the ε-schedule and returns the final
/// field with the full continuation path recorded in its metadata.
pub fn solve_radial(
    problem: &ValidatedProblem,
    mesh: &Mesh1D,
    opts: &SolverOptions,
) -> Result<SolutionField> {
    solve_radial_from(problem, mesh, opts, None)
}

/// Warm-started variant: `initial` skips the early continuation (the guess
/// is assumed converged near eps_min already).
pub fn solve_radial_from(
    problem: &ValidatedProblem,
    mesh: &Mesh1D,
    opts: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<SolutionField> {
    opts.validate()?;
    check_mesh_matches(problem, mesh)?;
    let spec = &problem.spec;
    let weight_exp = spec.domain.radial_weight_exponent();
    let m_exp = problem.layer_exponent();
    let dist = node_distances(mesh);

    let mut u: Vec<f64>;
    let mut eps_list: Vec<f64> = Vec::new();
    if opts.include_singular {
        if initial.is_some() {
            eps_list.push(opts.eps.eps_min);
        } else {
            let mut e = opts.eps.eps0;
            loop {
                eps_list.push(e);
                if e <= opts.eps.eps_min * (1.0 + 1e-9) {
                    break;
                }
                e = (e * opts.eps.factor).max(opts.eps.eps_min);
            }
            let last = eps_list.last_mut().unwrap();
            *last = opts.eps.eps_min.min(*last);
        }
    } else {
        eps_list.push(0.0);
    }

    u = match initial {
        Some(g) => {
            if g.len() != mesh.nodes.len() {
                return Err(Error::MeshMismatch);
            }
            g.to_vec()
        }
        None => {
            let bc0 = if opts.include_singular {
                eps_list[0].powf(m_exp)
            } else {
                0.0
            };
            let guess_exp = m_exp.min(1.0);
            dist.iter()
                .map(|&d| {
                    if d.is_finite() {
                        d.powf(guess_exp).max(bc0)
                    } else {
                        mesh.length().powf(guess_exp)
                    }
                })
                .collect()
        }
    };

    let mut steps: Vec<ContinuationStep> = Vec::new();
    let mut final_residual = f64::NAN;
    let mut eps_b = 0.0;
    for &eps in &eps_list {
        eps_b = if opts.include_singular { eps.powf(m_exp) } else { 0.0 };
        let disc = Disc {
            mesh,
            cell_w: mesh.cell_weights(weight_exp),
            mass: mesh.lumped_mass(weight_exp),
            p: spec.p,
            gamma: spec.gamma,
            q: spec.q,
            theta: spec.theta,
            eps,
            sing_scale: if opts.include_singular { opts.singular_scale } else { 0.0 },
            reaction: Some(&spec.reaction),
            rhs_nodal: None,
            grad_scheme: opts.gradient_term,
            bc: eps_b,
            require_positive: opts.require_positive,
        };
        // clamp the warm start above the new (smaller) trace
        for (ui, &d) in u.iter_mut().zip(&dist) {
            if d.is_finite() && *ui < eps_b {
                *ui = eps_b;
            }
        }
        let stats = newton_solve(&disc, &mut u, &opts.newton)?;
        final_residual = stats.residual;
        steps.push(ContinuationStep {
            eps,
            newton_iterations: stats.newton_iterations,
            picard_iterations: stats.picard_iterations,
            residual: stats.residual,
        });
    }

    debug_assert!(final_residual <= opts.newton.tol);
    let meta = SolveMeta {
        problem: Some(spec.clone()),
        eps_final: *eps_list.last().unwrap(),
        eps_boundary: eps_b,
        tolerance: opts.newton.tol,
        continuation: steps,
    };
    Ok(SolutionField::new(mesh.clone(), spec.domain.clone(), u, meta))
}

/// Weak residual of a field against the (regularized) equation, assembled
/// with hat test functions. Norms are of the scaled (relative) residual;
/// the raw nodal array is returned alongside.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_scaled: f64,
    pub l2_scaled: f64,
    pub nodal_raw: Vec<f64>,
    pub nodal_scaled: Vec<f64>,
}

pub fn weak_residual(
    problem: &ValidatedProblem,
    field: &SolutionField,
    opts: &SolverOptions,
) -> Result<ResidualReport> {
    check_mesh_matches(problem, &field.mesh)?;
    let spec = &problem.spec;
    let weight_exp = spec.domain.radial_weight_exponent();
    let disc = Disc {
        mesh: &field.mesh,
        cell_w: field.mesh.cell_weights(weight_exp),
        mass: field.mesh.lumped_mass(weight_exp),
        p: spec.p,
        gamma: spec.gamma,
        q: spec.q,
        theta: spec.theta,
        eps: field.meta.eps_final,
        sing_scale: if opts.include_singular { opts.singular_scale } else { 0.0 },
        reaction: Some(&spec.reaction),
        rhs_nodal: None,
        grad_scheme: opts.gradient_term,
        bc: field.meta.eps_boundary,
        require_positive: false,
    };
    let res = disc.residual(&field.values);
    let (lo, hi) = disc.unknown_range();
    let nodal_scaled: Vec<f64> = (0..res.r.len())
        .map(|i| {
            if i < lo || i > hi || res.r[i].abs() <= QUANTIZATION_SLACK * res.quant[i] {
                0.0
            } else {
                res.r[i] / res.scale[i]
            }
        })
        .collect();
    let max_scaled = disc.scaled_norm(&res);
    let l2_scaled = (nodal_scaled.iter().map(|v| v * v).sum::<f64>()
        / nodal_scaled.len() as f64)
        .sqrt();
    Ok(ResidualReport { max_scaled, l2_scaled, nodal_raw: res.r, nodal_scaled })
}

/// Successive solves on refined meshes (doubled cell and boundary-cell
/// budgets), warm-started by interpolation. Returns `levels + 1` fields,
/// the input's re-solve included first.
pub fn refine_and_resolve(
    problem: &ValidatedProblem,
    field: &SolutionField,
    levels: usize,
    opts: &SolverOptions,
) -> Result<Vec<SolutionField>> {
    if levels == 0 {
        return Err(Error::InvalidOptions("refine_and_resolve needs levels >= 1".into()));
    }
    let mut out = Vec::with_capacity(levels + 1);
    out.push(field.clone());
    let mut current = field.clone();
    for _ in 0..levels {
        let fine_mesh = current.mesh.refined()?;
        let guess: Vec<f64> = fine_mesh
            .nodes
            .iter()
            .map(|&x| current.value_at(x).max(0.0))
            .collect();
        let next = solve_radial_from(problem, &fine_mesh, opts, Some(&guess))?;
        out.push(next.clone());
        current = next;
    }
    Ok(out)
}

/// Weighted p-Poisson solve `-(w φ_p(u'))' = w * rhs` with the mesh's
/// Dirichlet pattern and zero trace; the eigenvalue iteration's inner step.
pub(crate) fn solve_weighted_p_poisson(
    p: f64,
    mesh: &Mesh1D,
    weight_exp: f64,
    rhs: &[f64],
    guess: Option<&[f64]>,
    tol: f64,
) -> Result<Vec<f64>> {
    let disc = Disc {
        mesh,
        cell_w: mesh.cell_weights(weight_exp),
        mass: mesh.lumped_mass(weight_exp),
        p,
        gamma: 1.0,
        q: 1.0,
        theta: 0.0,
        eps: 0.0,
        sing_scale: 0.0,
        reaction: None,
        rhs_nodal: Some(rhs),
        grad_scheme: GradScheme::Central,
        bc: 0.0,
        require_positive: false,
    };
    let mut u = match guess {
        Some(g) => g.to_vec(),
        None => mesh
            .nodes
            .iter()
            .map(|&x| {
                let dl = x - mesh.lo();
                let dh = mesh.hi() - x;
                let d = if mesh.dirichlet_lo && mesh.dirichlet_hi {
                    dl.min(dh)
                } else if mesh.dirichlet_hi {
                    dh
                } else {
                    dl
                };
                d
            })
            .collect(),
    };
    let stats = newton_solve(&disc, &mut u, &NewtonOptions { damping: 1.0, max_iter: 200, tol })?;
    let _ = stats;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{validate_problem, DomainSpec, ProblemSpec, ReactionSpec};

    fn torsion_problem(p: f64) -> ValidatedProblem {
        validate_problem(&ProblemSpec {
            p,
            gamma: 1.0,
            q: 1.0,
            theta: 0.0,
            reaction: ReactionSpec::Constant(1.0),
            domain: DomainSpec::Interval { r: 1.0 },
        })
        .unwrap()
    }

    fn linear_opts() -> SolverOptions {
        SolverOptions {
            include_singular: false,
            newton: NewtonOptions { tol: 1e-12, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn torsion_matches_closed_form_to_1e8() {
        // -u'' = 1 on (0,1): u = x(1-x)/2, exact for the P1 flux scheme
        let problem = torsion_problem(2.0);
        for mesh in [
            Mesh1D::uniform(0.0, 1.0, 128).unwrap(),
            Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 256).unwrap(),
        ] {
            let f = solve_radial(&problem, &mesh, &linear_opts()).unwrap();
            let err = mesh
                .nodes
                .iter()
                .zip(&f.values)
                .map(|(&x, &u)| (u - x * (1.0 - x) / 2.0).abs())
                .fold(0.0f64, f64::max);
            assert!(err <= 1e-8, "sup error {err}");
        }
    }

    #[test]
    fn p3_torsion_matches_closed_form() {
        // -(|u'|u')' = 1: u = (2/3)[(1/2)^(3/2) - |x-1/2|^(3/2)]
        let problem = torsion_problem(3.0);
        let mesh = Mesh1D::uniform(0.0, 1.0, 2048).unwrap();
        let f = solve_radial(&problem, &mesh, &linear_opts()).unwrap();
        let err = mesh
            .nodes
            .iter()
            .zip(&f.values)
            .map(|(&x, &u)| {
                let exact = (2.0 / 3.0) * (0.5f64.powf(1.5) - (x - 0.5).abs().powf(1.5));
                (u - exact).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(err <= 2e-5, "sup error {err}");
    }

    fn gradient_torsion_exact(x: f64) -> f64 {
        let y = (x - 0.5).abs();
        0.5 + (-0.5f64).exp() - y - (-y).exp()
    }

    #[test]
    fn gradient_term_oracle_second_order() {
        // -u'' + |u'| = 1 has the closed form above; central differences
        // keep the scheme second order, which pins the default
        let problem = validate_problem(&ProblemSpec {
            p: 2.0,
            gamma: 1.0,
            q: 1.0,
            theta: 1.0,
            reaction: ReactionSpec::Constant(1.0),
            domain: DomainSpec::Interval { r: 1.0 },
        })
        .unwrap();
        let mut errs = Vec::new();
        for n in [512usize, 1024, 2048] {
            let mesh = Mesh1D::uniform(0.0, 1.0, n).unwrap();
            let f = solve_radial(&problem, &mesh, &linear_opts()).unwrap();
            let err = mesh
                .nodes
                .iter()
                .zip(&f.values)
                .map(|(&x, &u)| (u - gradient_torsion_exact(x)).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        assert!(errs[2] <= 1e-5);
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 1.9 && order2 >= 1.9, "orders {order1:.2}, {order2:.2}");
    }

    #[test]
    fn weak_residual_of_exact_torsion_is_tiny() {
        let problem = torsion_problem(2.0);
        let mesh = Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 128).unwrap();
        let field = SolutionField::from_fn(mesh, DomainSpec::Interval { r: 1.0 }, |x| {
            x * (1.0 - x) / 2.0
        });
        let rep = weak_residual(&problem, &field, &linear_opts()).unwrap();
        assert!(rep.max_scaled <= 1e-8, "residual {}", rep.max_scaled);
    }

    #[test]
    fn residual_perturbation_stays_local() {
        let problem = torsion_problem(2.0);
        let mesh = Mesh1D::uniform(0.0, 1.0, 64).unwrap();
        let f = solve_radial(&problem, &mesh, &linear_opts()).unwrap();
        let base = weak_residual(&problem, &f, &linear_opts()).unwrap();
        let mut bumped = f.clone();
        let j = 31;
        bumped.values[j] += 0.1;
        let rep = weak_residual(&problem, &bumped, &linear_opts()).unwrap();
        for i in 1..64 {
            let delta = (rep.nodal_scaled[i] - base.nodal_scaled[i]).abs();
            if (i as i64 - j as i64).abs() > 1 {
                assert!(delta <= 1e-12, "node {i} changed by {delta}");
            }
        }
        assert!((rep.nodal_scaled[j] - base.nodal_scaled[j]).abs() > 1e-3);
    }

    #[test]
    fn singular_reference_solve_is_positive_and_symmetric() {
        let problem =
            validate_problem(&ProblemSpec::plain(2.0, 3.0, DomainSpec::Interval { r: 1.0 }))
                .unwrap();
        let mesh = Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 512).unwrap();
        let f = solve_radial(&problem, &mesh, &SolverOptions::default()).unwrap();
        assert!(f.min_interior() > 0.0);
        let n = mesh.n_cells();
        let asym = (0..=n)
            .map(|i| (f.values[i] - f.values[n - i]).abs())
            .fold(0.0f64, f64::max);
        assert!(asym <= 10.0 * 1e-9, "asymmetry {asym}");
        // continuation path recorded per schedule: 1e-2 .. 1e-10
        assert_eq!(f.meta.continuation.len(), 9);
        assert_eq!(f.meta.eps_final, 1e-10);
        assert!((f.meta.eps_boundary - 1e-5).abs() < 1e-17);
    }

    #[test]
    fn solver_residual_meets_tolerance() {
        let problem =
            validate_problem(&ProblemSpec::plain(2.0, 1.0, DomainSpec::Interval { r: 1.0 }))
                .unwrap();
        let mesh = Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 512).unwrap();
        let opts = SolverOptions::default();
        let f = solve_radial(&problem, &mesh, &opts).unwrap();
        let rep = weak_residual(&problem, &f, &opts).unwrap();
        assert!(rep.max_scaled <= opts.newton.tol * 1.0001);
    }

    #[test]
    fn refine_and_resolve_contract() {
        let problem =
            validate_problem(&ProblemSpec::plain(2.0, 3.0, DomainSpec::Interval { r: 1.0 }))
                .unwrap();
        let mesh = Mesh1D::graded_for(&DomainSpec::Interval { r: 1.0 }, 256).unwrap();
        let opts = SolverOptions::default();
        let f = solve_radial(&problem, &mesh, &opts).unwrap();
        assert!(matches!(
            refine_and_resolve(&problem, &f, 0, &opts),
            Err(Error::InvalidOptions(_))
        ));
        let fields = refine_and_resolve(&problem, &f, 2, &opts).unwrap();
        assert_eq!(fields.len(), 3);
        // boundary-layer value converges: successive differences shrink with
        // a consistent sign
        let probe = 1e-3;
        let v: Vec<f64> = fields.iter().map(|f| f.value_at(probe)).collect();
        let d1 = v[1] - v[0];
        let d2 = v[2] - v[1];
        assert!(d2.abs() < d1.abs());
        assert!(d1 * d2 >= 0.0 || d2.abs() < 1e-10);
    }

    #[test]
    fn radial_ball_solve_has_flat_center() {
        let problem =
            validate_problem(&ProblemSpec::plain(2.0, 2.0, DomainSpec::Ball { r: 1.0, dim: 2 }))
                .unwrap();
        let mesh = Mesh1D::graded_for(&DomainSpec::Ball { r: 1.0, dim: 2 }, 512).unwrap();
        let f = solve_radial(&problem, &mesh, &SolverOptions::default()).unwrap();
        assert!(f.values[0] > f.values[10]);
        // symmetry condition: derivative vanishes at the axis
        let du0 = (f.values[1] - f.values[0]) / mesh.cell_size(0);
        assert!(du0.abs() < 1e-2 * f.values[0]);
    }

    #[test]
    fn bad_options_rejected() {
        let problem = torsion_problem(2.0);
        let mesh = Mesh1D::uniform(0.0, 1.0, 32).unwrap();
        let mut opts = SolverOptions::default();
        opts.eps.eps_min = 1.0;
        assert!(matches!(
            solve_radial(&problem, &mesh, &opts),
            Err(Error::InvalidOptions(_))
        ));
    }
}
