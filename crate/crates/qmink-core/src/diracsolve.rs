//! Truncated momentum representations, the Dirac eigenproblem Uv = mv,
//! the printed solution families, the spin-1/2 momenta P~^t and their
//! spectral behaviour on the solution span.

use crate::catalog::CaseSpec;
use crate::error::QminkError;
use crate::matrixcore::{
    c, cr, identity, kron, max_diff, spectrum_report, CMat, CVec, C64, I,
};
use crate::structures::StructureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    OneA,
    OneB,
    TwoA,
    TwoB,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl RepParams {
    pub fn new(a: f64, b: f64, d: f64) -> Self {
        RepParams { a, b, d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassRegime {
    Massive,
    Massless,
}

/// A finite window of an irreducible momentum representation: the
/// generators A = p0+p3, B = p1-ip2, B* = p1+ip2, D = p0-p3 as matrices
/// on the spanned basis vectors.
#[derive(Debug, Clone)]
pub struct TruncatedRep {
    pub kind: RepKind,
    pub params: RepParams,
    pub spec: CaseSpec,
    pub dim: usize,
    /// Hilbert-basis label of array index 0 (negative for the l^2(Z) rep).
    pub offset: i64,
    pub op_a: CMat,
    pub op_b: CMat,
    pub op_bstar: CMat,
    pub op_d: CMat,
}

impl TruncatedRep {
    pub fn label(&self, idx: usize) -> i64 {
        self.offset + idx as i64
    }

    pub fn index_of(&self, label: i64) -> usize {
        (label - self.offset) as usize
    }

    /// Columns whose label is at least `margin` away from any truncated
    /// edge of the basis window. Scalar representations are untruncated.
    pub fn interior(&self, margin: usize) -> Vec<bool> {
        match self.kind {
            RepKind::OneB | RepKind::TwoB => vec![true; self.dim],
            RepKind::OneA => (0..self.dim)
                .map(|i| i >= margin && i + margin < self.dim)
                .collect(),
            // e_{-1} = 0 holds exactly, only the top edge is truncated
            RepKind::TwoA => (0..self.dim).map(|i| i + margin < self.dim).collect(),
        }
    }

    /// p^0, p^1, p^2, p^3 as matrices.
    pub fn p_ops(&self) -> [CMat; 4] {
        let half = cr(0.5);
        [
            (&self.op_a + &self.op_d) * half,
            (&self.op_b + &self.op_bstar) * half,
            (&self.op_b - &self.op_bstar) * (I * half),
            (&self.op_a - &self.op_d) * half,
        ]
    }
}

/// Build a truncated representation with `n` controlling the window size
/// (dim = n+1 for the l^2(Z) family with n even, dim = n for l^2(N)).
pub fn build_rep(
    kind: RepKind,
    params: RepParams,
    n: usize,
    spec: &CaseSpec,
) -> Result<TruncatedRep, QminkError> {
    spec.validate()?;
    let case_family = match kind {
        RepKind::OneA | RepKind::OneB => 1,
        RepKind::TwoA | RepKind::TwoB => 2,
    };
    if spec.case_id != case_family {
        return Err(QminkError::InvalidParameter(format!(
            "representation {:?} belongs to case {}, got case {}",
            kind, case_family, spec.case_id
        )));
    }
    let RepParams { a, b, d } = params;
    match kind {
        RepKind::OneA => {
            if b <= 0.0 {
                return Err(QminkError::InvalidParameter("need b > 0".into()));
            }
            if a == 0.0 && d == 0.0 {
                return Err(QminkError::InvalidParameter("need (a, d) != (0, 0)".into()));
            }
            if n < 4 || n % 2 != 0 {
                return Err(QminkError::InvalidParameter(
                    "window size must be even and at least 4".into(),
                ));
            }
            let t = spec.t();
            let m = (n / 2) as i64;
            let dim = n + 1;
            let mut op_a = CMat::zeros(dim, dim);
            let mut op_b = CMat::zeros(dim, dim);
            let mut op_bstar = CMat::zeros(dim, dim);
            let mut op_d = CMat::zeros(dim, dim);
            for i in 0..dim {
                let lbl = (i as i64 - m) as f64;
                op_a[(i, i)] = cr(t.powf(-2.0 * lbl) * a);
                op_d[(i, i)] = cr(t.powf(2.0 * lbl) * d);
                if i > 0 {
                    op_b[(i - 1, i)] = cr(b);
                    op_bstar[(i, i - 1)] = cr(b);
                }
            }
            Ok(TruncatedRep {
                kind,
                params,
                spec: spec.clone(),
                dim,
                offset: -m,
                op_a,
                op_b,
                op_bstar,
                op_d,
            })
        }
        RepKind::OneB => {
            let ok = b == 0.0 || (a == 0.0 && d == 0.0 && b != 0.0);
            if !ok {
                return Err(QminkError::InvalidParameter(
                    "scalar rep needs b = 0, or a = d = 0 with b != 0".into(),
                ));
            }
            Ok(scalar_rep(kind, params, spec, a, b, d))
        }
        RepKind::TwoA => {
            if d == 0.0 {
                return Err(QminkError::InvalidParameter("need d != 0".into()));
            }
            if n < 4 {
                return Err(QminkError::InvalidParameter(
                    "window size must be at least 4".into(),
                ));
            }
            let cc = spec.c();
            let dim = n;
            let mut op_a = CMat::zeros(dim, dim);
            let mut op_b = CMat::zeros(dim, dim);
            let mut op_bstar = CMat::zeros(dim, dim);
            let op_d = identity(dim) * cr(d);
            for i in 0..dim {
                op_a[(i, i)] = cr(cc * cc * (a + i as f64 * d));
                if i > 0 {
                    op_b[(i - 1, i)] = cr(cc * d * (i as f64).sqrt());
                    op_bstar[(i, i - 1)] = cr(cc * d * (i as f64).sqrt());
                }
            }
            Ok(TruncatedRep {
                kind,
                params,
                spec: spec.clone(),
                dim,
                offset: 0,
                op_a,
                op_b,
                op_bstar,
                op_d,
            })
        }
        RepKind::TwoB => {
            if d != 0.0 {
                return Err(QminkError::InvalidParameter("scalar rep needs d = 0".into()));
            }
            Ok(scalar_rep(kind, params, spec, a, b, 0.0))
        }
    }
}

fn scalar_rep(kind: RepKind, params: RepParams, spec: &CaseSpec, a: f64, b: f64, d: f64) -> TruncatedRep {
    let one = |v: f64| CMat::from_element(1, 1, cr(v));
    TruncatedRep {
        kind,
        params,
        spec: spec.clone(),
        dim: 1,
        offset: 0,
        op_a: one(a),
        op_b: one(b),
        op_bstar: one(b),
        op_d: one(d),
    }
}

/// Worst residual of p^k p^l = R^{lk}_{ji} p^i p^j, on columns deep
/// enough in the window that the quadratic products are exact.
pub fn representation_residual(rep: &TruncatedRep, ss: &StructureSet) -> f64 {
    let p = rep.p_ops();
    let mask = rep.interior(2);
    let scale = p.iter().map(|m| m.norm()).fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        for l in 0..4 {
            let mut res = &p[k] * &p[l];
            for j in 0..4 {
                for i in 0..4 {
                    let coeff = ss.r[(4 * l + k, 4 * j + i)];
                    if coeff.norm() > 0.0 {
                        res -= (&p[i] * &p[j]) * coeff;
                    }
                }
            }
            for s in 0..rep.dim {
                if mask[s] {
                    for row in 0..rep.dim {
                        worst = worst.max(res[(row, s)].norm());
                    }
                }
            }
        }
    }
    worst / (scale * scale)
}

/// Scalar value of pi(g_{ij} p^j p^i); errors if it fails to act as a
/// scalar on the deep interior or comes out negative.
pub fn mass_of(rep: &TruncatedRep, ss: &StructureSet) -> Result<f64, QminkError> {
    let p = rep.p_ops();
    let p_abs: Vec<nalgebra::DMatrix<f64>> = p.iter().map(|m| m.map(|z| z.norm())).collect();
    let mut m2 = CMat::zeros(rep.dim, rep.dim);
    // Entrywise magnitude of the summed terms: the floating-point error in
    // each entry of m2 is bounded by eps times the matching entry here, so
    // thresholds must scale with it rather than with the operator norms
    // (which can dwarf m^2 by many orders once t is far from 1).
    let mut m2_abs = nalgebra::DMatrix::<f64>::zeros(rep.dim, rep.dim);
    for i in 0..4 {
        for j in 0..4 {
            let coeff = ss.g_inv[(i, j)];
            if coeff.norm() > 0.0 {
                m2 += (&p[j] * &p[i]) * coeff;
                m2_abs += (&p_abs[j] * &p_abs[i]) * coeff.norm();
            }
        }
    }
    let mask = rep.interior(2);
    // Read m^2 off the best-conditioned interior diagonal entry (the one
    // with the smallest magnitude sum): entries near the window edges can
    // lose many digits to cancellation between large operator entries.
    let mut best: Option<(f64, C64)> = None;
    let mut dev: f64 = 0.0;
    let mut off_scale: f64 = 1.0;
    let mut diag_scale: f64 = 1.0;
    for s in 0..rep.dim {
        if !mask[s] {
            continue;
        }
        let mag = m2_abs[(s, s)];
        diag_scale = diag_scale.max(mag);
        if best.is_none_or(|(m, _)| mag < m) {
            best = Some((mag, m2[(s, s)]));
        }
    }
    let value = best
        .ok_or_else(|| {
            QminkError::InvalidParameter("window too small: no interior columns".into())
        })?
        .1;
    for s in 0..rep.dim {
        if !mask[s] {
            continue;
        }
        for row in 0..rep.dim {
            if row == s {
                dev = dev.max((m2[(s, s)] - value).norm());
            } else {
                off_scale = off_scale.max(m2_abs[(row, s)]);
                dev = dev.max(m2[(row, s)].norm());
            }
        }
    }
    dev = dev.max(value.im.abs());
    if dev > 1e-9 * off_scale.max(diag_scale) {
        return Err(QminkError::NotScalar(dev));
    }
    let m2val = value.re;
    if m2val < -1e-9 * diag_scale {
        return Err(QminkError::NegativeMassSquare(m2val));
    }
    if m2val.abs() <= 1e-10 * diag_scale {
        Ok(0.0)
    } else {
        Ok(m2val.sqrt())
    }
}

/// The Dirac eigenproblem matrix: U^{si}_{kn} = pi_{ks}(p^t) g_{at}
/// (gamma^a)^i_n, flattened bispinor-major, (i, s) -> i*dim + s.
pub fn build_u(rep: &TruncatedRep, ss: &StructureSet) -> CMat {
    let p = rep.p_ops();
    let dim = rep.dim;
    // lowered gamma: g_{at} gamma^a, summed over a, one 4x4 per t
    let mut u = CMat::zeros(4 * dim, 4 * dim);
    for t in 0..4 {
        let mut lowered = CMat::zeros(4, 4);
        for a in 0..4 {
            let coeff = ss.g_inv[(a, t)];
            if coeff.norm() > 0.0 {
                lowered += &ss.gamma[a] * coeff;
            }
        }
        u += kron(&lowered, &p[t].transpose());
    }
    u
}

struct SolutionFamilies {
    /// vectors[family][window position] over bispinor (x) H
    vectors: Vec<Vec<CVec>>,
    /// basis labels of the window positions
    labels: Vec<i64>,
}

fn assemble(dim: usize, entries: &[(usize, usize, C64)]) -> CVec {
    let mut v = CVec::zeros(4 * dim);
    for &(i, s, coeff) in entries {
        v[i * dim + s] += coeff;
    }
    v
}

/// The closed-form solution families of Uv = mv, evaluated on window
/// labels `margin` away from the truncated edges.
fn printed_solutions(
    rep: &TruncatedRep,
    m: f64,
    margin: usize,
) -> Result<SolutionFamilies, QminkError> {
    let RepParams { a, b, d } = rep.params;
    let dim = rep.dim;
    match rep.kind {
        RepKind::OneA => {
            let t = rep.spec.t();
            let mmax = -rep.offset;
            let lo = -mmax + margin as i64;
            let hi = mmax - margin as i64;
            if lo > hi {
                return Err(QminkError::InvalidParameter("window too small".into()));
            }
            let labels: Vec<i64> = (lo..=hi).collect();
            let mut fam0 = Vec::new();
            let mut fam1 = Vec::new();
            for &n in &labels {
                let nn = n as f64;
                let s = rep.index_of(n);
                if m > 0.0 {
                    fam0.push(assemble(
                        dim,
                        &[
                            (0, s, cr(m)),
                            (2, s, cr(t.powf(2.0 * nn - 1.0) * d)),
                            (3, rep.index_of(n - 1), cr(-t * b)),
                        ],
                    ));
                    fam1.push(assemble(
                        dim,
                        &[
                            (1, s, cr(m)),
                            (2, rep.index_of(n + 1), cr(-t * b)),
                            (3, s, cr(t.powf(-2.0 * nn - 1.0) * a)),
                        ],
                    ));
                } else {
                    fam0.push(assemble(
                        dim,
                        &[
                            (0, s, cr(b)),
                            (1, rep.index_of(n - 1), cr(d * t.powf(2.0 * nn - 2.0))),
                        ],
                    ));
                    fam1.push(assemble(
                        dim,
                        &[
                            (2, s, cr(b)),
                            (3, rep.index_of(n - 1), cr(-a * t.powf(-2.0 * nn))),
                        ],
                    ));
                }
            }
            Ok(SolutionFamilies { vectors: vec![fam0, fam1], labels })
        }
        RepKind::OneB => {
            let t = rep.spec.t();
            let one = cr(1.0);
            let vectors = if m > 0.0 {
                vec![
                    vec![assemble(1, &[(0, 0, cr(m)), (2, 0, cr(d / t))])],
                    vec![assemble(1, &[(1, 0, cr(m)), (3, 0, cr(a / t))])],
                ]
            } else if a == 0.0 && b == 0.0 {
                vec![
                    vec![assemble(1, &[(1, 0, one)])],
                    vec![assemble(1, &[(2, 0, one)])],
                ]
            } else if d == 0.0 && b == 0.0 {
                vec![
                    vec![assemble(1, &[(0, 0, one)])],
                    vec![assemble(1, &[(3, 0, one)])],
                ]
            } else {
                return Err(QminkError::UnsupportedCase(
                    "no printed solution family for this scalar representation".into(),
                ));
            };
            Ok(SolutionFamilies { vectors, labels: vec![0] })
        }
        RepKind::TwoA => {
            let cc = rep.spec.c();
            let lo = 1.max(margin.saturating_sub(1)) as i64;
            let hi = dim as i64 - 1 - margin as i64;
            if lo > hi {
                return Err(QminkError::InvalidParameter("window too small".into()));
            }
            let labels: Vec<i64> = (lo..=hi).collect();
            let mut fam0 = Vec::new();
            let mut fam1 = Vec::new();
            for &n in &labels {
                let nn = n as f64;
                let s = n as usize;
                if m > 0.0 {
                    fam0.push(assemble(
                        dim,
                        &[
                            (0, s, cr(m)),
                            (2, s, cr(d)),
                            (3, s - 1, cr(-cc * d * nn.sqrt())),
                        ],
                    ));
                    fam1.push(assemble(
                        dim,
                        &[
                            (1, s, cr(m)),
                            (2, s + 1, cr(-cc * d * (nn + 1.0).sqrt())),
                            (3, s, cr(cc * cc * (a + nn * d + d))),
                        ],
                    ));
                } else {
                    fam0.push(assemble(
                        dim,
                        &[
                            (0, s + 1, cr(cc * (nn + 1.0).sqrt())),
                            (1, s, cr(1.0)),
                        ],
                    ));
                    fam1.push(assemble(
                        dim,
                        &[(2, s, cr(1.0)), (3, s - 1, cr(-cc * nn.sqrt()))],
                    ));
                }
            }
            Ok(SolutionFamilies { vectors: vec![fam0, fam1], labels })
        }
        RepKind::TwoB => {
            if m > 0.0 || b != 0.0 || a == 0.0 {
                return Err(QminkError::UnsupportedCase(
                    "printed solutions for the scalar rep require b = 0, a != 0".into(),
                ));
            }
            Ok(SolutionFamilies {
                vectors: vec![
                    vec![assemble(1, &[(0, 0, cr(1.0))])],
                    vec![assemble(1, &[(3, 0, cr(1.0))])],
                ],
                labels: vec![0],
            })
        }
    }
}

/// Check the printed solution families against Uv = mv; returns the
/// worst relative residual and the number of vectors checked.
pub fn printed_solution_residual(
    rep: &TruncatedRep,
    ss: &StructureSet,
) -> Result<(f64, usize), QminkError> {
    let m = mass_of(rep, ss)?;
    let u = build_u(rep, ss);
    let shifted = &u - identity(4 * rep.dim) * cr(m);
    let scale = u.norm().max(1.0);
    let fams = printed_solutions(rep, m, 2)?;
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for fam in &fams.vectors {
        for v in fam {
            let norm = v.norm();
            if norm < 1e-12 {
                continue;
            }
            worst = worst.max((&shifted * v).norm() / (scale * norm));
            count += 1;
        }
    }
    if count == 0 {
        return Err(QminkError::InvalidParameter(
            "no solution vectors in the window".into(),
        ));
    }
    Ok((worst, count))
}

/// Numerical nullspace of (U - m) restricted to columns supported on
/// the deep interior of the window.
pub fn solve_dirac(rep: &TruncatedRep, ss: &StructureSet) -> Result<(f64, Vec<CVec>), QminkError> {
    let m = mass_of(rep, ss)?;
    let u = build_u(rep, ss);
    let dim = rep.dim;
    let shifted = &u - identity(4 * dim) * cr(m);
    let mask = rep.interior(2);
    let cols: Vec<usize> = (0..4 * dim).filter(|idx| mask[idx % dim]).collect();
    let mut restricted = CMat::zeros(4 * dim, cols.len());
    for (jc, &col) in cols.iter().enumerate() {
        restricted.set_column(jc, &shifted.column(col));
    }
    let small = crate::matrixcore::nullspace(&restricted, 1e-9 * u.norm().max(1.0));
    let mut out = Vec::new();
    for v in small {
        let mut full = CVec::zeros(4 * dim);
        for (jc, &col) in cols.iter().enumerate() {
            full[col] = v[jc];
        }
        out.push(full);
    }
    Ok((m, out))
}

pub struct MomentaOps {
    pub ptilde: [CMat; 4],
    pub rtilde: [CMat; 4],
    /// worst entry difference between P~^t and R~^t (+) (R~^t)^*
    pub table_residual: f64,
}

fn two_block(a: &CMat, b: &CMat, c_: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c_);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

fn rtilde_tables(rep: &TruncatedRep, ss: &StructureSet, case_id: u8) -> Result<[CMat; 4], QminkError> {
    let dim = rep.dim;
    let zero = CMat::zeros(dim, dim);
    let s2 = cr(ss.s / 2.0);
    let at = rep.op_a.clone();
    let dt = rep.op_d.clone();
    let bt = rep.op_b.transpose();
    let bst = rep.op_bstar.transpose();
    match case_id {
        1 => {
            let t = cr(rep.spec.t());
            let ti = cr(1.0 / rep.spec.t());
            Ok([
                two_block(&((&at * t + &dt * ti) * s2), &zero, &zero, &((&at * ti + &dt * t) * s2)),
                two_block(&((&bt * ti + &bst * t) * s2), &zero, &zero, &((&bst * ti + &bt * t) * s2)),
                two_block(
                    &((&bt * ti - &bst * t) * (I * s2)),
                    &zero,
                    &zero,
                    &((&bt * t - &bst * ti) * (I * s2)),
                ),
                two_block(&((&at * t - &dt * ti) * s2), &zero, &zero, &((&at * ti - &dt * t) * s2)),
            ])
        }
        2 => {
            let c2 = cr(rep.spec.c().powi(2));
            let sum_ad = (&at + &dt) * s2;
            let sum_b = (&bst + &bt) * s2;
            let dif_b = (&bt - &bst) * (I * s2);
            let dif_ad = (&at - &dt) * s2;
            Ok([
                two_block(&sum_ad, &(&bt * (-c2) * s2), &zero, &sum_ad),
                two_block(&sum_b, &(&dt * (-c2) * s2), &zero, &sum_b),
                two_block(&dif_b, &(&dt * (I * c2 * s2)), &zero, &dif_b),
                two_block(&dif_ad, &(&bt * (-c2) * s2), &zero, &dif_ad),
            ])
        }
        _ => Err(QminkError::UnsupportedCase(format!(
            "momenta tables exist only for cases 1 and 2, got {case_id}"
        ))),
    }
}

/// Spin-1/2 momenta P~^t = F^t_r (x) P^r on bispinor (x) H, with the
/// printed block form R~^t (+) (R~^t)^* they must match.
pub fn momenta_operators(
    rep: &TruncatedRep,
    ss: &StructureSet,
    case_id: u8,
) -> Result<MomentaOps, QminkError> {
    let p = rep.p_ops();
    let dim = rep.dim;
    let ptilde: [CMat; 4] = std::array::from_fn(|t| {
        let mut acc = CMat::zeros(4 * dim, 4 * dim);
        for r in 0..4 {
            acc += kron(&ss.f[t][r], &p[r].transpose());
        }
        acc
    });
    let rtilde = rtilde_tables(rep, ss, case_id)?;
    let mut residual: f64 = 0.0;
    for t in 0..4 {
        let expected = two_block(
            &rtilde[t],
            &CMat::zeros(2 * dim, 2 * dim),
            &CMat::zeros(2 * dim, 2 * dim),
            &rtilde[t].adjoint(),
        );
        residual = residual.max(max_diff(&ptilde[t], &expected));
    }
    Ok(MomentaOps { ptilde, rtilde, table_residual: residual })
}

/// Restriction matrices of P~^t to the span of printed solutions: the
/// finite section over an interior label window, computed column-exactly
/// (the momenta are banded and the solutions localized, so the expansion
/// of P~^t v(n) over neighbouring solutions is exact for interior n).
fn solution_restrictions(
    rep: &TruncatedRep,
    ss: &StructureSet,
) -> Result<(f64, Vec<CMat>), QminkError> {
    let m = mass_of(rep, ss)?;
    let mo = momenta_operators(rep, ss, rep.spec.case_id)?;
    let fams = printed_solutions(rep, m, 3)?;
    let nfam = fams.vectors.len();
    let width = fams.labels.len();
    if width < 5 {
        return Err(QminkError::InvalidParameter(
            "window too small for spectral analysis".into(),
        ));
    }
    let total = nfam * width;
    let mut basis = CMat::zeros(4 * rep.dim, total);
    for (f, fam) in fams.vectors.iter().enumerate() {
        for (w, v) in fam.iter().enumerate() {
            basis.set_column(f * width + w, &(v / cr(v.norm())));
        }
    }
    // probe columns: shrink the window by one label at each end
    let probe: Vec<usize> = (0..total).filter(|i| {
        let w = i % width;
        w >= 1 && w + 1 < width
    }).collect();

    let svd = basis.clone().svd(true, true);
    let mut worst_fit: f64 = 0.0;
    let mut sections = Vec::with_capacity(4);
    for t in 0..4 {
        let mut y = CMat::zeros(4 * rep.dim, probe.len());
        for (jc, &col) in probe.iter().enumerate() {
            y.set_column(jc, &(&mo.ptilde[t] * basis.column(col)));
        }
        let x = svd
            .solve(&y, 1e-10 * basis.norm().max(1.0))
            .map_err(|e| QminkError::StructureInconsistent(e.to_string()))?;
        let fit = (&basis * &x - &y).norm() / mo.ptilde[t].norm().max(1.0);
        worst_fit = worst_fit.max(fit);
        // finite section: keep only the rows that are themselves probes
        let mut section = CMat::zeros(probe.len(), probe.len());
        for (rc, &row) in probe.iter().enumerate() {
            for jc in 0..probe.len() {
                section[(rc, jc)] = x[(row, jc)];
            }
        }
        sections.push(section);
    }
    Ok((worst_fit, sections))
}

/// Detect complex spectrum of P~^t restricted to the solution span for
/// the bi-infinite representation 1a.
///
/// Finite sections are useless here: the restriction is a banded
/// block-Toeplitz operator on l^2(Z) whose truncations always have real
/// eigenvalues (a tridiagonal Toeplitz matrix with sub/super-diagonal
/// product beta*gamma > 0 has spectrum 2 sqrt(beta gamma) cos(k pi/(N+1))),
/// while the bi-infinite operator has the full symbol curve
/// p(theta) = sum_k C_k e^{ik theta} as spectrum. So the bands are
/// extracted from the unnormalized solution basis, checked for constancy
/// over the interior window, and the symbol's eigenvalues are scanned for
/// a non-real value.
pub fn restricted_symbol_has_complex(
    rep: &TruncatedRep,
    ss: &StructureSet,
) -> Result<bool, QminkError> {
    if rep.kind != RepKind::OneA {
        return Err(QminkError::UnsupportedCase(
            "symbol analysis applies to the l^2(Z) representation 1a".into(),
        ));
    }
    let m = mass_of(rep, ss)?;
    let mo = momenta_operators(rep, ss, rep.spec.case_id)?;
    let fams = printed_solutions(rep, m, 3)?;
    let nfam = fams.vectors.len();
    let width = fams.labels.len();
    if width < 5 {
        return Err(QminkError::InvalidParameter(
            "window too small for spectral analysis".into(),
        ));
    }
    let total = nfam * width;
    let mut basis = CMat::zeros(4 * rep.dim, total);
    for (f, fam) in fams.vectors.iter().enumerate() {
        for (w, v) in fam.iter().enumerate() {
            basis.set_column(f * width + w, v);
        }
    }
    let probe: Vec<usize> = (0..total)
        .filter(|i| {
            let w = i % width;
            w >= 1 && w + 1 < width
        })
        .collect();
    let svd = basis.clone().svd(true, true);
    let mut found_complex = false;
    for t in 1..=2usize {
        let mut y = CMat::zeros(4 * rep.dim, probe.len());
        for (jc, &col) in probe.iter().enumerate() {
            y.set_column(jc, &(&mo.ptilde[t] * basis.column(col)));
        }
        let x = svd
            .solve(&y, 1e-10 * basis.norm().max(1.0))
            .map_err(|e| QminkError::StructureInconsistent(e.to_string()))?;
        let fit = (&basis * &x - &y).norm() / y.norm().max(1.0);
        if fit > 1e-8 {
            return Err(QminkError::StructureInconsistent(format!(
                "solution span is not invariant under P~{t} (residual {fit:.2e})"
            )));
        }
        // collect the Toeplitz bands C_k[(f', f)] and check constancy
        let band_span = width as i64 - 1;
        let nbands = (2 * band_span + 1) as usize;
        let mut bands = vec![CMat::zeros(nfam, nfam); nbands];
        let mut filled = vec![CMat::zeros(nfam, nfam); nbands];
        let mut scale: f64 = 0.0;
        let mut toeplitz_err: f64 = 0.0;
        for (jc, &col) in probe.iter().enumerate() {
            let (fc, wc) = (col / width, col % width);
            for row in 0..total {
                let (fr, wr) = (row / width, row % width);
                let entry = x[(row, jc)];
                scale = scale.max(entry.norm());
                let k = (wr as i64 - wc as i64 + band_span) as usize;
                if filled[k][(fr, fc)].re > 0.5 {
                    toeplitz_err = toeplitz_err.max((bands[k][(fr, fc)] - entry).norm());
                } else {
                    bands[k][(fr, fc)] = entry;
                    filled[k][(fr, fc)] = cr(1.0);
                }
            }
        }
        if toeplitz_err > 1e-7 * scale.max(1.0) {
            return Err(QminkError::StructureInconsistent(format!(
                "restricted P~{t} is not Toeplitz over the window (deviation {toeplitz_err:.2e})"
            )));
        }
        // scan the symbol curve
        let samples = 64;
        for q in 0..samples {
            let theta = 2.0 * std::f64::consts::PI * q as f64 / samples as f64;
            let mut sym = CMat::zeros(nfam, nfam);
            for (k, band) in bands.iter().enumerate() {
                let phase = (I * cr(theta * (k as f64 - band_span as f64))).exp();
                sym += band * phase;
            }
            let report = spectrum_report(&sym, 1e-7);
            if !report.all_real {
                found_complex = true;
            }
        }
    }
    Ok(found_complex)
}

/// Spectrum reports of the four momenta restricted to the solution span
/// (finite sections over the interior window), plus the fit residual of
/// the restriction.
pub fn solution_spectra(
    rep: &TruncatedRep,
    ss: &StructureSet,
) -> Result<(f64, Vec<crate::matrixcore::SpectrumReport>), QminkError> {
    let (fit, sections) = solution_restrictions(rep, ss)?;
    let reports = sections
        .iter()
        .map(|s| spectrum_report(s, 1e-7))
        .collect();
    Ok((fit, reports))
}

/// Diagnostic dump of the restricted momenta spectra.
pub fn debug_spectral(rep: &TruncatedRep, ss: &StructureSet) -> Result<String, QminkError> {
    let (fit, sections) = solution_restrictions(rep, ss)?;
    let mut out = format!("  fit residual {fit:.3e}\n");
    for (t, section) in sections.iter().enumerate() {
        let rep = spectrum_report(section, 1e-7);
        let max_im = rep
            .eigenvalues
            .iter()
            .map(|l| l.im.abs())
            .fold(0.0f64, f64::max);
        out += &format!(
            "  P~{t}: dim {} max|Im| {max_im:.3e} all_real {} diagonalizable {}\n",
            section.nrows(),
            rep.all_real,
            rep.diagonalizable
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralFlags {
    /// some restricted momentum operator has a non-real eigenvalue
    pub complex_spectrum: bool,
    /// some restricted momentum operator fails to diagonalize
    pub nondiagonalizable: bool,
}

/// Expected spectral behaviour of the restricted momenta. For case 1 the
/// non-real eigenvalues exist only away from t = 1: at t = 1 the symbol
/// ellipse of the restricted shift degenerates to a real segment.
pub fn expected_spectral_flags(
    spec: &CaseSpec,
    regime: MassRegime,
) -> Result<SpectralFlags, QminkError> {
    match (spec.case_id, regime) {
        (1, MassRegime::Massive) => Ok(SpectralFlags {
            complex_spectrum: spec.t() != 1.0,
            nondiagonalizable: false,
        }),
        (2, MassRegime::Massive) => Ok(SpectralFlags {
            complex_spectrum: false,
            nondiagonalizable: true,
        }),
        (2, MassRegime::Massless) => Ok(SpectralFlags {
            complex_spectrum: false,
            nondiagonalizable: false,
        }),
        (case_id, _) => Err(QminkError::UnsupportedCase(format!(
            "no spectral claim recorded for case {case_id} / {regime:?}"
        ))),
    }
}

/// Compute the spectral flags of the momenta restricted to the solution
/// span and compare with the recorded expectation.
pub fn check_spectral_claims(
    kind: RepKind,
    params: RepParams,
    n: usize,
    spec: &CaseSpec,
    ss: &StructureSet,
    regime: MassRegime,
) -> Result<bool, QminkError> {
    let rep = build_rep(kind, params, n, spec)?;
    let m = mass_of(&rep, ss)?;
    let actual_regime = if m > 0.0 { MassRegime::Massive } else { MassRegime::Massless };
    if actual_regime != regime {
        return Err(QminkError::InvalidParameter(format!(
            "mass {m} does not match the requested {regime:?} regime"
        )));
    }
    let (fit, sections) = solution_restrictions(&rep, ss)?;
    if fit > 1e-8 {
        return Err(QminkError::StructureInconsistent(format!(
            "solution span is not invariant under the momenta (residual {fit:.2e})"
        )));
    }
    let mut complex_spectrum = false;
    let mut nondiagonalizable = false;
    for section in &sections {
        let report = spectrum_report(section, 1e-7);
        if !report.all_real {
            complex_spectrum = true;
        }
        if !report.diagonalizable {
            nondiagonalizable = true;
        }
    }
    // Finite sections of the l^2(Z) restriction cannot show the complex
    // part of the spectrum (Toeplitz truncation collapses the symbol
    // ellipse to a real segment), so that flag comes from the symbol.
    if rep.kind == RepKind::OneA {
        complex_spectrum = restricted_symbol_has_complex(&rep, ss)?;
    }
    let got = SpectralFlags { complex_spectrum, nondiagonalizable };
    Ok(got == expected_spectral_flags(spec, regime)?)
}

/// Solution span of P_j gamma^j v = m v for classical momenta.
pub fn classical_solutions(p: [f64; 4]) -> Result<Vec<CVec>, QminkError> {
    let m2 = p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
    let scale = p.iter().map(|x| x * x).fold(1.0, f64::max);
    if m2 < -1e-12 * scale {
        return Err(QminkError::TachyonicMomentum(m2));
    }
    let m = if m2 > 1e-12 * scale { m2.sqrt() } else { 0.0 };
    if m > 0.0 {
        // v = (phi, m^-1 P_k sigma_k phi), sigma_0 = 1 included
        let sigma = crate::catalog::pauli();
        let mut lower = CMat::zeros(2, 2);
        for k in 0..4 {
            lower += &sigma[k] * cr(p[k] / m);
        }
        let mut out = Vec::new();
        for col in 0..2 {
            let mut v = CVec::zeros(4);
            v[col] = cr(1.0);
            for rowi in 0..2 {
                v[2 + rowi] = lower[(rowi, col)];
            }
            out.push(v);
        }
        Ok(out)
    } else if p[0] + p[3] != 0.0 {
        Ok(vec![
            CVec::from_vec(vec![c(p[1], -p[2]), cr(-p[0] - p[3]), cr(0.0), cr(0.0)]),
            CVec::from_vec(vec![cr(0.0), cr(0.0), cr(p[0] + p[3]), c(p[1], p[2])]),
        ])
    } else if p != [0.0; 4] {
        Ok(vec![
            CVec::from_vec(vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0)]),
            CVec::from_vec(vec![cr(0.0), cr(0.0), cr(0.0), cr(1.0)]),
        ])
    } else {
        Ok((0..4)
            .map(|i| {
                let mut v = CVec::zeros(4);
                v[i] = cr(1.0);
                v
            })
            .collect())
    }
}

/// Verify the classical plane-wave spans against the classical gamma
/// matrices on a few sample momenta.
pub fn classical_plane_wave_checks() -> Result<(), QminkError> {
    let spec = CaseSpec::new(1).with_t(1.0);
    let ld = crate::catalog::build_lorentz_data(&spec)?;
    let ss = crate::structures::build_structures(&ld)?;
    let samples: [[f64; 4]; 6] = [
        [2.0, 0.3, -0.4, 0.5],   // massive
        [1.0, 0.0, 0.0, 0.0],    // rest frame
        [1.0, 0.6, 0.8, 0.0],    // null, P0 != -P3
        [1.0, 0.0, 0.0, -1.0],   // null, P0 = -P3 != 0
        [0.0, 0.0, 0.0, 0.0],    // zero momentum
        [5.0, 3.0, 0.0, 4.0],    // null
    ];
    for p in samples {
        let m2 = p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
        let m = if m2 > 1e-12 { m2.sqrt() } else { 0.0 };
        let sols = classical_solutions(p)?;
        let expected_dim = if p == [0.0; 4] { 4 } else { 2 };
        if sols.len() != expected_dim {
            return Err(QminkError::StructureInconsistent(format!(
                "expected {expected_dim} plane-wave solutions, got {}",
                sols.len()
            )));
        }
        let mut slashed = CMat::zeros(4, 4);
        for j in 0..4 {
            slashed += &ss.gamma[j] * cr(p[j]);
        }
        for v in &sols {
            let res = (&slashed * v - v * cr(m)).norm() / v.norm();
            if res > 1e-10 {
                return Err(QminkError::StructureInconsistent(format!(
                    "plane-wave residual {res:.2e} at momentum {p:?}"
                )));
            }
        }
        // linear independence of the span
        let mut mat = CMat::zeros(4, sols.len());
        for (j, v) in sols.iter().enumerate() {
            mat.set_column(j, v);
        }
        if crate::matrixcore::rank(&mat, 1e-10 * mat.norm().max(1.0)) != sols.len() {
            return Err(QminkError::StructureInconsistent(
                "plane-wave solutions are linearly dependent".into(),
            ));
        }
    }
    if classical_solutions([0.0, 1.0, 0.0, 0.0]).is_ok() {
        return Err(QminkError::StructureInconsistent(
            "spacelike momentum should be rejected".into(),
        ));
    }
    Ok(())
}
