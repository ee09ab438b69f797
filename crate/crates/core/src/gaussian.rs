//! Pure Gaussian states, H-graphs and symplectic transformations.
//!
//! Conventions used throughout the crate:
//!
//! * quadratures are stored in xxpp order, `(x_1, .., x_n, p_1, .., p_n)`;
//! * `[x, p] = i`, so the vacuum has `Var(x) = Var(p) = 1/2`;
//! * a pure state with complex adjacency matrix `Z = V + iU` has covariance
//!   `Σ = ½ [[U⁻¹, U⁻¹V], [VU⁻¹, U + VU⁻¹V]]`.
//!
//! States are immutable values. Every transformation returns a new state.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Quadrature variance of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.5;
/// Smallest eigenvalue accepted as "non-negative" in positivity checks.
pub const PD_TOLERANCE: f64 = 1e-10;
/// Allowed deviation of `det(2Σ)` from one.
pub const PURITY_TOLERANCE: f64 = 1e-9;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Beam {
    Idler,
    Signal,
}

/// Transverse Hermite-Gauss mode of a beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spatial {
    Hg01,
    Hg10,
}

/// One spatial mode of one beam; the unit selected by delays and relabelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rail {
    pub beam: Beam,
    pub spatial: Spatial,
}

impl Rail {
    pub const SIGNAL_01: Rail = Rail::new(Beam::Signal, Spatial::Hg01);
    pub const SIGNAL_10: Rail = Rail::new(Beam::Signal, Spatial::Hg10);
    pub const IDLER_01: Rail = Rail::new(Beam::Idler, Spatial::Hg01);
    pub const IDLER_10: Rail = Rail::new(Beam::Idler, Spatial::Hg10);

    pub const fn new(beam: Beam, spatial: Spatial) -> Self {
        Rail { beam, spatial }
    }

    pub const fn at(self, timebin: i64) -> ModeId {
        ModeId { beam: self.beam, spatial: self.spatial, timebin }
    }
}

/// Address of a mode in the spatiotemporal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub beam: Beam,
    pub spatial: Spatial,
    pub timebin: i64,
}

impl ModeId {
    pub const fn new(beam: Beam, spatial: Spatial, timebin: i64) -> Self {
        ModeId { beam, spatial, timebin }
    }

    pub const fn rail(&self) -> Rail {
        Rail::new(self.beam, self.spatial)
    }

    pub const fn shifted(self, delta: i64) -> Self {
        ModeId { timebin: self.timebin + delta, ..self }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let beam = match self.beam {
            Beam::Idler => 'i',
            Beam::Signal => 's',
        };
        let spatial = match self.spatial {
            Spatial::Hg01 => "01",
            Spatial::Hg10 => "10",
        };
        write!(f, "{beam}{spatial}@{}", self.timebin)
    }
}

/// Symmetric 0/1 adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyGraph {
    entries: DMatrix<f64>,
}

impl AdjacencyGraph {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidGraph(format!(
                "matrix is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = entries.nrows();
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = entries[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidGraph(format!("entry ({i},{j}) = {v} is not 0 or 1")));
                }
                if v != entries[(j, i)] {
                    return Err(Error::InvalidGraph(format!("entry ({i},{j}) breaks symmetry")));
                }
            }
        }
        Ok(AdjacencyGraph { entries })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut entries = DMatrix::zeros(n, n);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) outside {n} vertices")));
            }
            entries[(a, b)] = 1.0;
            entries[(b, a)] = 1.0;
        }
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_self_inverse(&self) -> bool {
        let sq = &self.entries * &self.entries;
        let id = DMatrix::<f64>::identity(self.len(), self.len());
        (sq - id).amax() < 1e-12
    }

    /// Two-colorability by breadth-first search.
    pub fn is_bipartite(&self) -> bool {
        let n = self.len();
        let mut color: Vec<Option<bool>> = vec![None; n];
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let cv = color[v].unwrap();
                for w in 0..n {
                    if self.entries[(v, w)] == 0.0 {
                        continue;
                    }
                    match color[w] {
                        None => {
                            color[w] = Some(!cv);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cv => return false,
                        Some(_) => {}
                    }
                }
            }
        }
        true
    }

    pub fn is_self_inverse_bipartite(&self) -> bool {
        self.is_self_inverse() && self.is_bipartite()
    }
}

/// Complex adjacency matrix `Z = V + iU` of a pure Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGraph {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl ComplexGraph {
    /// Checks symmetry of both parts and positive definiteness of `U`.
    pub fn new(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        if !re.is_square() || re.shape() != im.shape() {
            return Err(Error::Unphysical("real and imaginary parts must be equal square matrices".into()));
        }
        if !is_symmetric(&re) || !is_symmetric(&im) {
            return Err(Error::Unphysical("Z is not symmetric".into()));
        }
        let min_eig = im.clone().symmetric_eigen().eigenvalues.min();
        if min_eig <= PD_TOLERANCE {
            return Err(Error::Unphysical(format!(
                "Im Z is not positive definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(ComplexGraph { re, im })
    }

    /// Reads `Z` back from the covariance of a pure state.
    pub fn from_state(state: &GaussianState) -> Result<Self> {
        let n = state.n_modes();
        let xx = state.cov.view((0, 0), (n, n)).clone_owned();
        let xp = state.cov.view((0, n), (n, n)).clone_owned();
        let u = (xx * 2.0)
            .try_inverse()
            .ok_or_else(|| Error::Unphysical("singular position covariance".into()))?;
        let v = &u * xp * 2.0;
        // Symmetrize away rounding before validating.
        let v = (&v + v.transpose()) * 0.5;
        let u = (&u + u.transpose()) * 0.5;
        Self::new(v, u)
    }

    pub fn len(&self) -> usize {
        self.re.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `V = Re Z`.
    pub fn real(&self) -> &DMatrix<f64> {
        &self.re
    }

    /// `U = Im Z`.
    pub fn imag(&self) -> &DMatrix<f64> {
        &self.im
    }
}

/// H-graph state of a self-inverse bipartite graph: `Z = i cosh(2r) I − i sinh(2r) G`.
pub fn hgraph_state(graph: &AdjacencyGraph, r: f64) -> Result<ComplexGraph> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("squeezing parameter must be finite and >= 0, got {r}")));
    }
    if !graph.is_self_inverse_bipartite() {
        return Err(Error::NotSelfInverseBipartite);
    }
    let n = graph.len();
    let im = DMatrix::<f64>::identity(n, n) * (2.0 * r).cosh() - graph.entries() * (2.0 * r).sinh();
    ComplexGraph::new(DMatrix::zeros(n, n), im)
}

/// Covariance matrix of the pure state described by `z`, one label per mode.
pub fn covariance_of(z: &ComplexGraph, labels: Vec<ModeId>) -> Result<GaussianState> {
    let n = z.len();
    if labels.len() != n {
        return Err(Error::InvalidParameter(format!("{} labels for {n} modes", labels.len())));
    }
    let u_inv = z
        .im
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Unphysical("Im Z is not positive definite".into()))?
        .inverse();
    let v = &z.re;
    let xp = &u_inv * v;
    let pp = &z.im + v * &u_inv * v;
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    cov.view_mut((0, 0), (n, n)).copy_from(&(&u_inv * 0.5));
    cov.view_mut((0, n), (n, n)).copy_from(&(&xp * 0.5));
    cov.view_mut((n, 0), (n, n)).copy_from(&(xp.transpose() * 0.5));
    cov.view_mut((n, n), (n, n)).copy_from(&(pp * 0.5));
    GaussianState::from_parts(labels, cov)
}

/// Standard symplectic form `Ω = [[0, I], [−I, 0]]` in xxpp order.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// Beam splitter `(a, b) → [[cos θ, −sin θ], [sin θ, cos θ]] (a, b)` on both quadrature blocks.
pub fn beamsplitter_symplectic(n: usize, a: usize, b: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for off in [0, n] {
        m[(off + a, off + a)] = c;
        m[(off + a, off + b)] = -s;
        m[(off + b, off + a)] = s;
        m[(off + b, off + b)] = c;
    }
    m
}

/// Phase-space rotation `(x, p) → [[cos φ, −sin φ], [sin φ, cos φ]] (x, p)` of one mode.
pub fn rotation_symplectic(n: usize, a: usize, phi: f64) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    let mut m = DMatrix::identity(2 * n, 2 * n);
    m[(a, a)] = c;
    m[(a, n + a)] = -s;
    m[(n + a, a)] = s;
    m[(n + a, n + a)] = c;
    m
}

/// Covariance matrix of a pure Gaussian state with labelled modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    labels: Vec<ModeId>,
    index: HashMap<ModeId, usize>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(labels: Vec<ModeId>) -> Result<Self> {
        let n = labels.len();
        Self::from_parts(labels, DMatrix::identity(2 * n, 2 * n) * VACUUM_VARIANCE)
    }

    /// Validated constructor: symmetric, positive definite, uncertainty-respecting and pure.
    pub fn from_covariance(labels: Vec<ModeId>, cov: DMatrix<f64>) -> Result<Self> {
        let state = Self::from_parts(labels, cov)?;
        state.check_physical()?;
        Ok(state)
    }

    fn from_parts(labels: Vec<ModeId>, cov: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if cov.shape() != (2 * n, 2 * n) {
            return Err(Error::InvalidParameter(format!(
                "covariance is {}x{} for {n} modes",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, &m) in labels.iter().enumerate() {
            if index.insert(m, i).is_some() {
                return Err(Error::DuplicateMode(m));
            }
        }
        Ok(GaussianState { labels, index, cov })
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ModeId] {
        &self.labels
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn contains(&self, mode: ModeId) -> bool {
        self.index.contains_key(&mode)
    }

    pub fn index_of(&self, mode: ModeId) -> Result<usize> {
        self.index.get(&mode).copied().ok_or(Error::UnknownMode(mode))
    }

    /// Tensor product; the modes of `other` are appended after those of `self`.
    pub fn direct_sum(&self, other: &GaussianState) -> Result<Self> {
        let (n1, n2) = (self.n_modes(), other.n_modes());
        let n = n1 + n2;
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        // (block of source, offset in target) for the x and p halves
        for (src, base, len) in [(&self.cov, 0, n1), (&other.cov, n1, n2)] {
            for (si, ti) in [(0, base), (len, n + base)] {
                for (sj, tj) in [(0, base), (len, n + base)] {
                    cov.view_mut((ti, tj), (len, len))
                        .copy_from(&src.view((si, sj), (len, len)));
                }
            }
        }
        let labels = self.labels.iter().chain(other.labels.iter()).copied().collect();
        Self::from_parts(labels, cov)
    }

    pub fn apply_beamsplitter(&self, a: ModeId, b: ModeId, theta: f64) -> Result<Self> {
        if a == b {
            return Err(Error::SameMode(a));
        }
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)?);
        let n = self.n_modes();
        let (s, c) = theta.sin_cos();
        let block = [[c, -s], [s, c]];
        let mut out = self.clone();
        out.transform_pair([ia, ib], block);
        out.transform_pair([n + ia, n + ib], block);
        Ok(out)
    }

    pub fn apply_rotation(&self, a: ModeId, phi: f64) -> Result<Self> {
        let ia = self.index_of(a)?;
        let n = self.n_modes();
        let (s, c) = phi.sin_cos();
        let mut out = self.clone();
        out.transform_pair([ia, n + ia], [[c, -s], [s, c]]);
        Ok(out)
    }

    /// `Σ → S Σ Sᵀ` for an `S` that is the identity except on two quadrature indices.
    fn transform_pair(&mut self, idx: [usize; 2], m: [[f64; 2]; 2]) {
        let dim = self.cov.nrows();
        let [i, j] = idx;
        for col in 0..dim {
            let (vi, vj) = (self.cov[(i, col)], self.cov[(j, col)]);
            self.cov[(i, col)] = m[0][0] * vi + m[0][1] * vj;
            self.cov[(j, col)] = m[1][0] * vi + m[1][1] * vj;
        }
        for row in 0..dim {
            let (vi, vj) = (self.cov[(row, i)], self.cov[(row, j)]);
            self.cov[(row, i)] = m[0][0] * vi + m[0][1] * vj;
            self.cov[(row, j)] = m[1][0] * vi + m[1][1] * vj;
        }
    }

    /// Applies an arbitrary symplectic matrix on all modes.
    pub fn apply_symplectic(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.shape() != self.cov.shape() {
            return Err(Error::InvalidParameter("symplectic matrix has the wrong size".into()));
        }
        let mut out = self.clone();
        out.cov = s * &self.cov * s.transpose();
        Ok(out)
    }

    /// Moves every mode on `rail` forward by `delta` time bins. Σ is untouched.
    pub fn relabel_delay(&self, rail: Rail, delta: u32) -> Self {
        let labels: Vec<ModeId> = self
            .labels
            .iter()
            .map(|&m| if m.rail() == rail { m.shifted(delta as i64) } else { m })
            .collect();
        let index = labels.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        GaussianState { labels, index, cov: self.cov.clone() }
    }

    /// Folds every time bin into `0..period`.
    pub fn wrap_timebins(&self, period: i64) -> Result<Self> {
        if period <= 0 {
            return Err(Error::InvalidParameter(format!("wrap period must be positive, got {period}")));
        }
        let labels = self
            .labels
            .iter()
            .map(|&m| ModeId { timebin: m.timebin.rem_euclid(period), ..m })
            .collect();
        Self::from_parts(labels, self.cov.clone())
    }

    fn coefficient_vector(&self, q: &QuadratureForm) -> Result<nalgebra::DVector<f64>> {
        let n = self.n_modes();
        let mut v = nalgebra::DVector::zeros(2 * n);
        for (&m, &c) in &q.h {
            v[self.index_of(m)?] += c;
        }
        for (&m, &c) in &q.g {
            v[n + self.index_of(m)?] += c;
        }
        Ok(v)
    }

    /// `(Var(û), Var(v̂))` for `û = Σ h_j x̂_j` and `v̂ = Σ g_j p̂_j`.
    pub fn variance_of(&self, q: &QuadratureForm) -> Result<(f64, f64)> {
        let n = self.n_modes();
        let mut hx = Vec::with_capacity(q.h.len());
        for (&m, &c) in &q.h {
            hx.push((self.index_of(m)?, c));
        }
        let mut gp = Vec::with_capacity(q.g.len());
        for (&m, &c) in &q.g {
            gp.push((n + self.index_of(m)?, c));
        }
        let quad = |terms: &[(usize, f64)]| {
            terms
                .iter()
                .map(|&(i, a)| terms.iter().map(|&(j, b)| a * b * self.cov[(i, j)]).sum::<f64>())
                .sum::<f64>()
        };
        Ok((quad(&hx), quad(&gp)))
    }

    /// Variance of the single operator `û + v̂`, cross terms included.
    pub fn total_variance(&self, q: &QuadratureForm) -> Result<f64> {
        let v = self.coefficient_vector(q)?;
        Ok((v.transpose() * &self.cov * &v)[(0, 0)])
    }

    /// `|det(2Σ) − 1|`, evaluated through a Cholesky log-determinant.
    pub fn purity_defect(&self) -> f64 {
        match (self.cov.clone() * 2.0).cholesky() {
            Some(ch) => {
                let logdet: f64 = ch.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
                logdet.exp_m1().abs()
            }
            None => f64::INFINITY,
        }
    }

    /// Smallest eigenvalue of `Σ + (i/2)Ω`, via its real symmetric representation.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let dim = self.cov.nrows();
        let half_omega = symplectic_form(self.n_modes()) * 0.5;
        let mut real = DMatrix::zeros(2 * dim, 2 * dim);
        real.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        real.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        real.view_mut((0, dim), (dim, dim)).copy_from(&(-&half_omega));
        real.view_mut((dim, 0), (dim, dim)).copy_from(&half_omega);
        real.symmetric_eigen().eigenvalues.min()
    }

    pub fn check_physical(&self) -> Result<()> {
        if !is_symmetric(&self.cov) {
            return Err(Error::Unphysical("covariance is not symmetric".into()));
        }
        let min_eig = self.cov.clone().symmetric_eigen().eigenvalues.min();
        if min_eig <= PD_TOLERANCE {
            return Err(Error::Unphysical(format!("covariance not positive definite ({min_eig:e})")));
        }
        let unc = self.uncertainty_min_eigenvalue();
        if unc < -PD_TOLERANCE {
            return Err(Error::Unphysical(format!("uncertainty relation violated ({unc:e})")));
        }
        let defect = self.purity_defect();
        if defect > PURITY_TOLERANCE {
            return Err(Error::Unphysical(format!("state is not pure, |det(2Σ) − 1| = {defect:e}")));
        }
        Ok(())
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(1.0);
    (m - m.transpose()).amax() <= SYMMETRY_TOLERANCE * scale
}

/// Linear combination `û = Σ h_j x̂_j` together with `v̂ = Σ g_j p̂_j`.
///
/// Zero coefficients are pruned, so an empty map means the quadrature does not appear.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadratureForm {
    h: BTreeMap<ModeId, f64>,
    g: BTreeMap<ModeId, f64>,
}

impl QuadratureForm {
    pub fn new(
        h: impl IntoIterator<Item = (ModeId, f64)>,
        g: impl IntoIterator<Item = (ModeId, f64)>,
    ) -> Result<Self> {
        let mut form = QuadratureForm::default();
        for (m, c) in h {
            *form.h.entry(m).or_insert(0.0) += c;
        }
        for (m, c) in g {
            *form.g.entry(m).or_insert(0.0) += c;
        }
        form.validated()
    }

    pub fn x_only(h: impl IntoIterator<Item = (ModeId, f64)>) -> Result<Self> {
        Self::new(h, [])
    }

    pub fn p_only(g: impl IntoIterator<Item = (ModeId, f64)>) -> Result<Self> {
        Self::new([], g)
    }

    fn validated(mut self) -> Result<Self> {
        if self.h.values().chain(self.g.values()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidForm("non-finite coefficient".into()));
        }
        self.h.retain(|_, c| *c != 0.0);
        self.g.retain(|_, c| *c != 0.0);
        if self.h.is_empty() && self.g.is_empty() {
            return Err(Error::InvalidForm("all coefficients are zero".into()));
        }
        Ok(self)
    }

    pub fn h(&self) -> &BTreeMap<ModeId, f64> {
        &self.h
    }

    pub fn g(&self) -> &BTreeMap<ModeId, f64> {
        &self.g
    }

    pub fn h_coeff(&self, m: ModeId) -> f64 {
        self.h.get(&m).copied().unwrap_or(0.0)
    }

    pub fn g_coeff(&self, m: ModeId) -> f64 {
        self.g.get(&m).copied().unwrap_or(0.0)
    }

    /// Modes with a nonzero x or p coefficient, sorted.
    pub fn support(&self) -> Vec<ModeId> {
        let mut s: Vec<ModeId> = self.h.keys().chain(self.g.keys()).copied().collect();
        s.sort();
        s.dedup();
        s
    }

    /// Squared Euclidean norm of the full coefficient vector.
    pub fn norm_sq(&self) -> f64 {
        self.h.values().chain(self.g.values()).map(|c| c * c).sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.h.iter().map(|(&m, &v)| (m, c * v)),
            self.g.iter().map(|(&m, &v)| (m, c * v)),
        )
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &QuadratureForm, b: f64) -> Result<Self> {
        Self::new(
            self.h.iter().map(|(&m, &v)| (m, a * v)).chain(other.h.iter().map(|(&m, &v)| (m, b * v))),
            self.g.iter().map(|(&m, &v)| (m, a * v)).chain(other.g.iter().map(|(&m, &v)| (m, b * v))),
        )
    }

    pub fn map_modes(&self, f: impl Fn(ModeId) -> ModeId) -> Result<Self> {
        Self::new(
            self.h.iter().map(|(&m, &v)| (f(m), v)),
            self.g.iter().map(|(&m, &v)| (f(m), v)),
        )
    }

    /// The form that reads the same operator after `relabel_delay(rail, delta)`.
    pub fn relabel_delay(&self, rail: Rail, delta: u32) -> Self {
        self.map_modes(|m| if m.rail() == rail { m.shifted(delta as i64) } else { m })
            .expect("relabeling preserves nonzero coefficients")
    }

    /// Pull-back through a rotation of `mode` by `phi`.
    ///
    /// For every state ρ, the variance of the returned form on ρ equals the
    /// variance of `self` on ρ rotated by `phi`.
    pub fn pulled_back_through_rotation(&self, mode: ModeId, phi: f64) -> Result<Self> {
        let (s, c) = phi.sin_cos();
        let (h0, g0) = (self.h_coeff(mode), self.g_coeff(mode));
        let mut h = self.h.clone();
        let mut g = self.g.clone();
        h.insert(mode, c * h0 + s * g0);
        g.insert(mode, -s * h0 + c * g0);
        QuadratureForm { h, g }.validated()
    }
}
