//! Equivalence of deformations by flatness of `H − H′` and an explicit Moser
//! isotopy on the base.
//!
//! The isotopy is `V_t = g_t ∂_{b₁}` with
//! `g_t = (H − H′)/(α + ∂₁H + t·∂₁(H′ − H))`, integrated from `t = 0` to `1`.
//! Its time-one map `φ(b) = (φ₁(b), b₂, …, bₙ)` pulls `τ₀ + dH′` back to
//! `τ₀ + dH`.
//!
//! Flatness at Δ cannot be decided from samples. A function is scored as
//! flat to order `k_max` when every `|∂_J g|`, `|J| ≤ k_max`, either stays
//! below [`VALUE_FLOOR`] or decays along the approach paths faster than
//! `d^{k_max − |J| + 2}`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr;
use crate::fd;
use crate::models::{FibrationModel, ModelKind};
use crate::ode::{self, OdeOptions};
use crate::periods::{alpha_quadrature, fit_loglog, log_space, DeformationH};
use crate::poly_geometry::{BaseParams, LEG_DIRECTIONS};

pub const DEFAULT_K_MAX: usize = 3;
pub const VALUE_FLOOR: f64 = 1e-12;
pub const DEFAULT_DENOM_FLOOR: f64 = 1e-3;
/// A derivative counts as vanishing on Δ once it decays at least like `d^½`.
const VANISHING_EXPONENT: f64 = 0.5;
const GRID_RADII: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.45, 0.6];
const LEG_FEET: [[f64; 3]; 3] = [[0.0, 1.0, 1.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]];

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationPair {
    pub h: DeformationH,
    pub hp: DeformationH,
    pub family: FibrationModel,
    diff: DeformationH,
}

impl DeformationPair {
    pub fn new(h: DeformationH, hp: DeformationH, family: FibrationModel) -> Result<Self> {
        let n = family.n();
        if h.n() != n || hp.n() != n {
            return Err(Error::InvalidInput(format!(
                "deformations must live on a base of dimension {n}"
            )));
        }
        let diff = DeformationH::from_expr(expr::difference(h.expr(), hp.expr()), n)?;
        Ok(DeformationPair { h, hp, family, diff })
    }

    pub fn parse(h: &str, hp: &str, family: FibrationModel) -> Result<Self> {
        let n = family.n();
        Self::new(DeformationH::parse(h, n)?, DeformationH::parse(hp, n)?, family)
    }

    /// `H − H′` with common summands cancelled.
    pub fn difference(&self) -> &DeformationH {
        &self.diff
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.hp.clone(), self.h.clone(), self.family).expect("same dimensions")
    }

    /// `(H + G, H′ + G)`.
    pub fn shifted(&self, g: &DeformationH) -> Result<Self> {
        Self::new(self.h.plus(g), self.hp.plus(g), self.family)
    }
}

/// The `db₁` coefficient `α` of the singular period form.
pub fn singular_alpha(model: &FibrationModel, b: &[f64]) -> Result<f64> {
    match model.kind {
        ModelKind::FocusFocus22 => Ok(-b[0].hypot(b[1]).ln()),
        ModelKind::HarveyLawson { .. } => alpha_quadrature(&BaseParams::from_slice(b)?),
    }
}

/// Components of `τ₀` that are compared under pullback: all three for the
/// focus-focus model (principal Arg), only `db₁` for Harvey–Lawson.
fn singular_form(model: &FibrationModel, b: &[f64]) -> Result<Vec<f64>> {
    match model.kind {
        ModelKind::FocusFocus22 => Ok(vec![-b[0].hypot(b[1]).ln(), b[1].atan2(b[0]), 0.0]),
        ModelKind::HarveyLawson { .. } => Ok(vec![singular_alpha(model, b)?]),
    }
}

// ---------------------------------------------------------------- flatness

/// `foot + d·normal`, with `foot ∈ Δ` and `dist(foot + d·normal, Δ) = d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachPath {
    pub foot: Vec<f64>,
    pub normal: Vec<f64>,
}

impl ApproachPath {
    pub fn point(&self, d: f64) -> Vec<f64> {
        self.foot.iter().zip(&self.normal).map(|(f, v)| f + d * v).collect()
    }
}

fn normal_frame(leg: usize) -> ([f64; 3], [f64; 3]) {
    let l = LEG_DIRECTIONS[leg];
    let u = [1.0, 0.0, 0.0];
    let v = [l[1] * u[2] - l[2] * u[1], l[2] * u[0] - l[0] * u[2], l[0] * u[1] - l[1] * u[0]];
    (u, v)
}

/// Transversal approach paths: the focus-focus line `s = 0` at two heights,
/// or the three Harvey–Lawson legs and the vertex. Angles avoid the Arg cut.
pub fn default_paths(model: &FibrationModel) -> Vec<ApproachPath> {
    let angles: Vec<f64> = (0..4)
        .map(|k| std::f64::consts::FRAC_PI_8 + k as f64 * std::f64::consts::FRAC_PI_2)
        .collect();
    match model.kind {
        ModelKind::FocusFocus22 => [0.3, 0.7]
            .iter()
            .flat_map(|&r| {
                angles.iter().map(move |a| ApproachPath {
                    foot: vec![0.0, 0.0, r],
                    normal: vec![a.cos(), a.sin(), 0.0],
                })
            })
            .collect(),
        ModelKind::HarveyLawson { n: 3 } => {
            let mut out: Vec<ApproachPath> = (0..3)
                .flat_map(|leg| {
                    let (u, v) = normal_frame(leg);
                    angles[..2].iter().map(move |a| ApproachPath {
                        foot: LEG_FEET[leg].to_vec(),
                        normal: (0..3).map(|i| a.cos() * u[i] + a.sin() * v[i]).collect(),
                    })
                })
                .collect();
            out.push(ApproachPath {
                foot: vec![0.0; 3],
                normal: vec![1.0, 0.0, 0.0],
            });
            out
        }
        ModelKind::HarveyLawson { n } => {
            // b = (t, 0, …, 0) recedes from the origin, which lies on Δ.
            let mut normal = vec![0.0; n];
            normal[0] = 1.0;
            vec![ApproachPath {
                foot: vec![0.0; n],
                normal,
            }]
        }
    }
}

/// Log-spaced approach distances in `[1e−4, 1e−1]`.
pub fn default_distances() -> Vec<f64> {
    log_space(1e-4, 1e-1, 10)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessRow {
    pub index: Vec<usize>,
    pub order: usize,
    /// Worst decay exponent over the paths; `None` when every sample is
    /// below the floor.
    pub exponent: Option<f64>,
    pub threshold: f64,
    /// Largest `|∂_J g|` at the smallest distance.
    pub nearest_value: f64,
    /// Tends to 0 at Δ along every path.
    pub vanishes: bool,
    /// Passes the super-polynomial decay test along every path.
    pub superpoly: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessTable {
    pub k_max: usize,
    pub rows: Vec<FlatnessRow>,
    pub pass: bool,
    /// Smallest `|J|` with a derivative that does not vanish on Δ.
    pub first_nonvanishing_order: Option<usize>,
    /// Smallest `|J|` failing the decay test.
    pub first_failing_order: Option<usize>,
}

struct PathScore {
    exponent: Option<f64>,
    nearest: f64,
    vanishes: bool,
    superpoly: bool,
}

fn score_samples(ds: &[f64], vals: &[f64], threshold: f64) -> PathScore {
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| ds[a].total_cmp(&ds[b]));
    let nearest = vals[order[0]];
    if vals.iter().any(|v| !v.is_finite()) {
        return PathScore {
            exponent: None,
            nearest,
            vanishes: false,
            superpoly: false,
        };
    }
    let above: Vec<usize> = order.iter().copied().filter(|&i| vals[i] >= VALUE_FLOOR).collect();
    if above.is_empty() {
        return PathScore {
            exponent: None,
            nearest,
            vanishes: true,
            superpoly: true,
        };
    }
    // Samples above the floor only at the far end: the values sink below the
    // floor inside the window.
    let first_above = order.iter().position(|&i| vals[i] >= VALUE_FLOOR).expect("non-empty");
    let drops_out = first_above > 0 && order[first_above..].iter().all(|&i| vals[i] >= VALUE_FLOOR);
    let xs: Vec<f64> = above.iter().map(|&i| ds[i]).collect();
    let ys: Vec<f64> = above.iter().map(|&i| vals[i]).collect();
    let exponent = fit_loglog(&xs, &ys).ok().map(|f| f.slope);
    match exponent {
        Some(e) => PathScore {
            exponent: Some(e),
            nearest,
            vanishes: drops_out || e > VANISHING_EXPONENT,
            superpoly: drops_out || e > threshold,
        },
        None => PathScore {
            exponent: None,
            nearest,
            vanishes: drops_out,
            superpoly: drops_out,
        },
    }
}

/// Decay table of `|∂_J g|` along `paths` at the given distances; derivatives
/// are central differences with step `0.1·d`.
pub fn flatness_score<G>(g: &G, k_max: usize, paths: &[ApproachPath], distances: &[f64]) -> FlatnessTable
where
    G: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    let n = paths.first().map(|p| p.foot.len()).unwrap_or(0);
    let mut rows = Vec::new();
    for index in fd::multi_indices(n, k_max) {
        let order = index.len();
        let threshold = (k_max - order) as f64 + 2.0;
        let mut row = FlatnessRow {
            index: index.clone(),
            order,
            exponent: None,
            threshold,
            nearest_value: 0.0,
            vanishes: true,
            superpoly: true,
        };
        for path in paths {
            let vals: Vec<f64> = distances
                .iter()
                .map(|&d| {
                    fd::mixed_partial(g, &path.point(d), &index, 0.1 * d)
                        .map(f64::abs)
                        .unwrap_or(f64::NAN)
                })
                .collect();
            let s = score_samples(distances, &vals, threshold);
            row.nearest_value = row.nearest_value.max(s.nearest);
            if s.nearest.is_nan() {
                row.nearest_value = f64::NAN;
            }
            row.exponent = match (row.exponent, s.exponent) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            row.vanishes &= s.vanishes;
            row.superpoly &= s.superpoly;
        }
        rows.push(row);
    }
    let first_nonvanishing_order = rows.iter().filter(|r| !r.vanishes).map(|r| r.order).min();
    let first_failing_order = rows.iter().filter(|r| !r.superpoly).map(|r| r.order).min();
    FlatnessTable {
        k_max,
        pass: first_failing_order.is_none(),
        rows,
        first_nonvanishing_order,
        first_failing_order,
    }
}

/// [`flatness_score`] of a deformation function on the default paths.
pub fn flatness_of(model: &FibrationModel, g: &DeformationH, k_max: usize) -> FlatnessTable {
    let f = |b: &[f64]| g.eval(model, b);
    flatness_score(&f, k_max, &default_paths(model), &default_distances())
}

// ---------------------------------------------------------------- isotopy

/// `g_t(b)`; zero wherever `H − H′` evaluates to zero.
pub fn moser_field(pair: &DeformationPair, b: &[f64], t: f64) -> Result<f64> {
    moser_field_with_floor(pair, b, t, DEFAULT_DENOM_FLOOR)
}

pub fn moser_field_with_floor(pair: &DeformationPair, b: &[f64], t: f64, denom_floor: f64) -> Result<f64> {
    let model = &pair.family;
    let num = pair.diff.eval(model, b)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let psi = pair.h.partial(model, b, 0)? - t * pair.diff.partial(model, b, 0)?;
    let den = singular_alpha(model, b)? + psi;
    if !(den.abs() > denom_floor) {
        return Err(Error::DenominatorVanishes { b: b.to_vec(), t });
    }
    Ok(num / den)
}

/// `b ↦ (φ₁(b), b₂, …, bₙ)`.
#[derive(Clone)]
pub enum DiffeoMap {
    Identity,
    /// Time-one map of the Moser field of the pair.
    Moser {
        pair: Box<DeformationPair>,
        opts: OdeOptions,
        denom_floor: f64,
    },
    /// Closed-form `φ₁`.
    Explicit(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for DiffeoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffeoMap::Identity => write!(f, "Identity"),
            DiffeoMap::Moser { pair, .. } => write!(f, "Moser({} ; {})", pair.h.expr(), pair.hp.expr()),
            DiffeoMap::Explicit(_) => write!(f, "Explicit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffeoSample {
    pub b: Vec<f64>,
    pub phi1: f64,
    /// `∂_{b_j}φ₁`.
    pub jacobian: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BaseDiffeo {
    pub map: DiffeoMap,
    pub samples: Vec<DiffeoSample>,
}

impl BaseDiffeo {
    pub fn identity() -> Self {
        BaseDiffeo {
            map: DiffeoMap::Identity,
            samples: Vec::new(),
        }
    }

    pub fn moser(pair: &DeformationPair) -> Self {
        Self::moser_with(pair, DEFAULT_DENOM_FLOOR)
    }

    /// At least 40 steps over `t ∈ [0, 1]`.
    pub fn moser_with(pair: &DeformationPair, denom_floor: f64) -> Self {
        BaseDiffeo {
            map: DiffeoMap::Moser {
                pair: Box::new(pair.clone()),
                opts: OdeOptions::default().with_h_max(1.0 / 40.0),
                denom_floor,
            },
            samples: Vec::new(),
        }
    }

    pub fn explicit<F>(phi1: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        BaseDiffeo {
            map: DiffeoMap::Explicit(Arc::new(phi1)),
            samples: Vec::new(),
        }
    }

    /// `φ₁(b) − b₁`.
    pub fn displacement(&self, b: &[f64]) -> Result<f64> {
        match &self.map {
            DiffeoMap::Identity => Ok(0.0),
            DiffeoMap::Explicit(f) => Ok(f(b) - b[0]),
            DiffeoMap::Moser { pair, opts, denom_floor } => {
                let mut failure: Option<Error> = None;
                let mut point = b.to_vec();
                let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
                    point[0] = b[0] + y[0];
                    dy[0] = match moser_field_with_floor(pair, &point, t, *denom_floor) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    };
                };
                let res = ode::integrate(rhs, 0.0, &[0.0], 1.0, opts);
                if let Some(e) = failure {
                    return Err(e);
                }
                Ok(res?[0])
            }
        }
    }

    pub fn phi1(&self, b: &[f64]) -> Result<f64> {
        Ok(b[0] + self.displacement(b)?)
    }

    pub fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut out = b.to_vec();
        out[0] = self.phi1(b)?;
        Ok(out)
    }

    /// `∂_{b_j}φ₁` by central differences of the displacement.
    pub fn jacobian(&self, b: &[f64], h: f64) -> Result<Vec<f64>> {
        let u = |x: &[f64]| self.displacement(x);
        let mut g = fd::gradient(&u, b, h)?;
        g[0] += 1.0;
        Ok(g)
    }

    /// Evaluate on `grid`, storing the samples.
    pub fn sample(mut self, grid: &[Vec<f64>], h: f64) -> Result<Self> {
        self.samples = grid
            .iter()
            .map(|b| {
                Ok(DiffeoSample {
                    b: b.clone(),
                    phi1: self.phi1(b)?,
                    jacobian: self.jacobian(b, h)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self)
    }

    /// `∂_{b₁}φ₁ > 0` on every stored sample.
    pub fn orientation_preserving(&self) -> bool {
        self.samples.iter().all(|s| s.jacobian[0] > 0.0)
    }
}

/// Finite-difference step for Jacobians of sampled maps.
pub const JACOBIAN_STEP: f64 = 1e-5;

pub fn integrate_isotopy(pair: &DeformationPair, grid: &[Vec<f64>]) -> Result<BaseDiffeo> {
    BaseDiffeo::moser(pair).sample(grid, JACOBIAN_STEP)
}

/// Grid for the isotopy: circles of radii up to `ball` around the focus-focus
/// line, or in the normal planes of the three Harvey–Lawson legs.
pub fn isotopy_grid(model: &FibrationModel, ball: f64) -> Vec<Vec<f64>> {
    let angles: Vec<f64> = (0..8)
        .map(|k| std::f64::consts::FRAC_PI_8 + k as f64 * std::f64::consts::FRAC_PI_4)
        .collect();
    let radii: Vec<f64> = GRID_RADII.iter().copied().filter(|&r| r <= ball).collect();
    let mut out = Vec::new();
    match model.kind {
        ModelKind::FocusFocus22 => {
            for r in [0.3, 0.7] {
                for &rho in &radii {
                    for a in &angles {
                        out.push(vec![rho * a.cos(), rho * a.sin(), r]);
                    }
                }
            }
        }
        ModelKind::HarveyLawson { n: 3 } => {
            for (leg, foot) in LEG_FEET.iter().enumerate() {
                let (u, v) = normal_frame(leg);
                for &rho in &radii {
                    for a in &angles {
                        out.push((0..3).map(|i| foot[i] + rho * (a.cos() * u[i] + a.sin() * v[i])).collect());
                    }
                }
            }
        }
        ModelKind::HarveyLawson { n } => {
            for &rho in &radii {
                for a in &angles {
                    let mut b = vec![0.0; n];
                    b[0] = rho * a.cos();
                    b[1] = 1.0 + rho * a.sin();
                    out.push(b);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackReport {
    /// Largest residual over the grid and all period forms.
    pub max: f64,
    /// Per period form: the singular one first, then the regular ones.
    pub per_form: Vec<f64>,
    pub points: usize,
}

/// `sup ‖(τ′ ∘ φ)·Dφ − τ‖` over the grid, with `τ = τ₀ + dH` and
/// `τ′ = τ₀ + dH′`.
pub fn pullback_residual(phi: &BaseDiffeo, pair: &DeformationPair, grid: &[Vec<f64>]) -> Result<PullbackReport> {
    let model = &pair.family;
    let n = model.n();
    let mut singular: f64 = 0.0;
    for b in grid {
        if matches!(model.kind, ModelKind::FocusFocus22) && b[1] == 0.0 && b[0] < 0.0 {
            return Err(Error::BranchCrossing);
        }
        let pb = phi.apply(b)?;
        if matches!(model.kind, ModelKind::FocusFocus22) && (pb[1] == 0.0 && pb[0] < 0.0) {
            return Err(Error::BranchCrossing);
        }
        let jac = phi.jacobian(b, JACOBIAN_STEP)?;
        let t0_img = singular_form(model, &pb)?;
        let t0 = singular_form(model, b)?;
        let dhp = pair.hp.gradient(model, &pb)?;
        let dh = pair.h.gradient(model, b)?;
        for j in 0..t0.len() {
            let img1 = t0_img[0] + dhp[0];
            let mut pulled = img1 * jac[j];
            if j > 0 {
                pulled += t0_img[j] + dhp[j];
            }
            singular = singular.max((pulled - (t0[j] + dh[j])).abs());
        }
    }
    // φ fixes b₂ … bₙ, so each regular form c·db_k pulls back to itself.
    let mut per_form = vec![singular];
    per_form.extend(std::iter::repeat_n(0.0, n - 1));
    Ok(PullbackReport {
        max: per_form.iter().copied().fold(0.0, f64::max),
        per_form,
        points: grid.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeesReport {
    /// `max |φ₁ − b₁|` at distances `≤ 1e−2`.
    pub tangency: f64,
    pub tangent: bool,
    pub tables: Vec<FlatnessTable>,
}

/// `max |φ₁(b) − b₁|` along the paths at distances in `[1e−4, 1e−2]`.
pub fn tangency_defect(phi: &BaseDiffeo, paths: &[ApproachPath]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in paths {
        for d in log_space(1e-4, 1e-2, 5) {
            worst = worst.max(phi.displacement(&p.point(d))?.abs());
        }
    }
    Ok(worst)
}

pub const TANGENCY_TOL: f64 = 1e-8;

/// Flatness of `T = φ*τ₀ − τ₀`, component by component.
pub fn tees_residual(
    phi: &BaseDiffeo,
    model: &FibrationModel,
    k_max: usize,
    paths: &[ApproachPath],
    distances: &[f64],
) -> Result<TeesReport> {
    let tangency = tangency_defect(phi, paths)?;
    let comps = singular_form(model, &paths[0].point(0.5)).map(|v| v.len()).unwrap_or(1);
    let tables = (0..comps)
        .map(|j| {
            let t = |b: &[f64]| -> Result<f64> {
                let h = 1e-3 * model.base_distance(b);
                let pb = phi.apply(b)?;
                let jac = phi.jacobian(b, h)?;
                let img = singular_form(model, &pb)?;
                let own = singular_form(model, b)?;
                let mut v = img[0] * jac[j] - own[j];
                if j > 0 {
                    v += img[j];
                }
                Ok(v)
            };
            flatness_score(&t, k_max, paths, distances)
        })
        .collect();
    Ok(TeesReport {
        tangency,
        tangent: tangency <= TANGENCY_TOL,
        tables,
    })
}

// ---------------------------------------------------------------- verdict

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Equivalent => "equivalent",
            Status::NotEquivalent => "not_equivalent",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictOptions {
    pub k_max: usize,
    pub denom_floor: f64,
    pub pullback_tol: f64,
    /// Only grid points farther than this from Δ enter the pullback check.
    pub pullback_min_dist: f64,
    pub initial_ball: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            k_max: DEFAULT_K_MAX,
            denom_floor: DEFAULT_DENOM_FLOOR,
            pullback_tol: 1e-4,
            pullback_min_dist: 0.05,
            initial_ball: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub flatness: FlatnessTable,
    pub pullback: Option<PullbackReport>,
    pub tangency: Option<f64>,
    pub ball_radius: Option<f64>,
    /// The constructed `φ` on the isotopy grid.
    pub diffeo: Vec<DiffeoSample>,
    pub notes: Vec<String>,
}

pub fn equivalence_verdict(pair: &DeformationPair) -> Verdict {
    equivalence_verdict_with(pair, &VerdictOptions::default())
}

pub fn equivalence_verdict_with(pair: &DeformationPair, opts: &VerdictOptions) -> Verdict {
    let model = &pair.family;
    let flatness = flatness_of(model, pair.difference(), opts.k_max);
    let mut notes = vec![format!(
        "finite-order test: flatness scored up to order {} on sampled approach paths",
        opts.k_max
    )];
    let mut verdict = Verdict {
        status: Status::Inconclusive,
        flatness,
        pullback: None,
        tangency: None,
        ball_radius: None,
        diffeo: Vec::new(),
        notes: Vec::new(),
    };
    if !verdict.flatness.pass {
        verdict.status = Status::NotEquivalent;
        notes.push(format!(
            "H − H′ is not flat: decay test fails at order {}",
            verdict.flatness.first_failing_order.unwrap_or(0)
        ));
        verdict.notes = notes;
        return verdict;
    }
    let mut ball = opts.initial_ball;
    let diffeo = loop {
        let grid = isotopy_grid(model, ball);
        match BaseDiffeo::moser_with(pair, opts.denom_floor).sample(&grid, JACOBIAN_STEP) {
            Ok(d) => break Some(d),
            Err(Error::DenominatorVanishes { b, t }) => {
                notes.push(format!("denominator vanishes at b = {b:?}, t = {t}; shrinking ball from {ball}"));
                ball *= 0.8;
                if ball < GRID_RADII[1] {
                    break None;
                }
            }
            Err(e) => {
                notes.push(format!("isotopy failed: {e}"));
                break None;
            }
        }
    };
    let Some(diffeo) = diffeo else {
        verdict.notes = notes;
        return verdict;
    };
    verdict.ball_radius = Some(ball);
    let check_grid: Vec<Vec<f64>> = diffeo
        .samples
        .iter()
        .map(|s| s.b.clone())
        .filter(|b| model.base_distance(b) > opts.pullback_min_dist)
        .collect();
    let pullback = pullback_residual(&diffeo, pair, &check_grid);
    let tangency = tangency_defect(&diffeo, &default_paths(model));
    verdict.diffeo = diffeo.samples.clone();
    match (pullback, tangency) {
        (Ok(p), Ok(t)) => {
            let ok = p.max <= opts.pullback_tol && t <= TANGENCY_TOL && diffeo.orientation_preserving();
            if !ok {
                notes.push(format!(
                    "period matching failed: pullback residual {:.3e}, tangency {:.3e}",
                    p.max, t
                ));
            }
            verdict.status = if ok { Status::Equivalent } else { Status::Inconclusive };
            verdict.pullback = Some(p);
            verdict.tangency = Some(t);
        }
        (Err(e), _) | (_, Err(e)) => notes.push(format!("period matching failed: {e}")),
    }
    verdict.notes = notes;
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff() -> FibrationModel {
        FibrationModel::focus_focus22()
    }

    #[test]
    fn flatness_examples() {
        let m = ff();
        let t = flatness_of(&m, &DeformationH::parse("exp(-1/d^2)*b1", 3).unwrap(), 3);
        assert!(t.pass, "{t:?}");
        let t = flatness_of(&m, &DeformationH::parse("b1", 3).unwrap(), 3);
        assert!(!t.pass);
        assert_eq!(t.first_nonvanishing_order, Some(1));
        let t = flatness_of(&m, &DeformationH::zero(3), 3);
        assert!(t.pass && t.rows.iter().all(|r| r.nearest_value == 0.0));
    }

    #[test]
    fn moser_field_examples() {
        let pair = DeformationPair::parse("b1*b3", "b1*b3", ff()).unwrap();
        assert_eq!(moser_field(&pair, &[0.2, 0.1, 0.5], 0.3).unwrap(), 0.0);
        let pair = DeformationPair::parse("0", "b1^2 + b2^2", ff()).unwrap();
        let b = [0.3, 0.2, 0.5];
        let g = moser_field(&pair, &b, 0.0).unwrap();
        let s2: f64 = 0.3 * 0.3 + 0.2 * 0.2;
        assert!((g - (-s2) / (-(s2.sqrt()).ln())).abs() < 1e-14);
        let pair = DeformationPair::parse("0", "flatbump(d)", ff()).unwrap();
        for d in [1e-2, 3e-3] {
            let b = [d * 0.6, d * 0.8, 0.5];
            assert!(moser_field(&pair, &b, 0.5).unwrap().abs() <= 1e-8);
        }
    }

    #[test]
    fn identity_diffeo_and_tees() {
        let paths = default_paths(&ff());
        let r = tees_residual(&BaseDiffeo::identity(), &ff(), 2, &paths[..2], &log_space(1e-4, 1e-1, 6)).unwrap();
        assert!(r.tangent);
        assert!(r.tables.iter().all(|t| t.pass));
        let bent = BaseDiffeo::explicit(|b| b[0] + 0.1 * b[0] * b[0]);
        let r = tees_residual(&bent, &ff(), 2, &paths[..2], &log_space(1e-4, 1e-1, 6)).unwrap();
        assert!(!r.tables[0].pass);
        assert_eq!(r.tables[0].first_nonvanishing_order, Some(1));
    }

    #[test]
    fn trivial_verdicts() {
        let v = equivalence_verdict(&DeformationPair::parse("b1^2", "b1^2", ff()).unwrap());
        assert_eq!(v.status, Status::Equivalent);
        assert!(v.pullback.unwrap().max < 1e-10);
        let v = equivalence_verdict(&DeformationPair::parse("0", "b1", ff()).unwrap());
        assert_eq!(v.status, Status::NotEquivalent);
    }
}
