//! Grid verification suite shared by the CLI `verify` command and the
//! acceptance tests: table oracles, structural identities, calculus
//! checks, Dirac residuals and spectral claims.

use crate::catalog::CaseSpec;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: impl Into<String>, residual: f64) -> Self {
        CheckResult {
            name: name.into(),
            passed: true,
            residual,
            detail: String::new(),
        }
    }

    fn fail(name: impl Into<String>, residual: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: false,
            residual,
            detail: detail.into(),
        }
    }

    fn of(name: impl Into<String>, ok: bool, residual: f64, detail: impl Into<String>) -> Self {
        if ok {
            CheckResult::pass(name, residual)
        } else {
            CheckResult::fail(name, residual, detail)
        }
    }
}

/// Default parameter grid: t in {0.3, 0.7, 1.0}, c in {0.5, 1.0, 2.0},
/// r in {0, 1.5}, s = +1. Case 7 excludes t = 1.
pub fn default_grid() -> Vec<CaseSpec> {
    let ts = [0.3, 0.7, 1.0];
    let cs = [0.5, 1.0, 2.0];
    let rs = [0.0, 1.5];
    let mut grid = Vec::new();
    for &t in &ts {
        grid.push(CaseSpec::new(1).with_t(t));
    }
    for &c in &cs {
        grid.push(CaseSpec::new(2).with_c(c));
    }
    for &c in &cs {
        for &r in &rs {
            grid.push(CaseSpec::new(3).with_c(c).with_r(r));
        }
    }
    for &c in &cs {
        grid.push(CaseSpec::new(4).with_c(c));
    }
    for &t in &ts {
        grid.push(CaseSpec::new(5).with_t(t));
    }
    for &c in &cs {
        grid.push(CaseSpec::new(6).with_c(c));
    }
    for &t in &ts[..2] {
        grid.push(CaseSpec::new(7).with_t(t));
    }
    grid
}

fn case_label(spec: &CaseSpec) -> String {
    let mut s = format!("case {}", spec.case_id);
    if let Some(t) = spec.t {
        s += &format!(" t={}", t);
    }
    if let Some(c) = spec.c {
        s += &format!(" c={}", c);
    }
    if let Some(r) = spec.r {
        s += &format!(" r={}", r);
    }
    s
}

pub mod checks {
    use super::*;
    use crate::catalog::build_lorentz_data;
    use crate::matrixcore::{identity, max_diff, CMat};
    use crate::qalgebra::{self, Bispinor, Poly, RewriteTable};
    use crate::structures::{self, StructureSet};

    pub fn tables(spec: &CaseSpec, ss: &StructureSet, tol: f64, out: &mut Vec<CheckResult>) {
        let label = case_label(spec);
        let dg = max_diff(&ss.g, &structures::expected_metric(spec));
        out.push(CheckResult::of(
            format!("{label}: metric table"),
            dg <= tol,
            dg,
            "g does not match the per-case table",
        ));
        let want = structures::expected_a_i(spec);
        let da = (0..4)
            .map(|i| max_diff(&ss.a_i[i], &want[i]))
            .fold(0.0, f64::max);
        out.push(CheckResult::of(
            format!("{label}: gamma table (A_i)"),
            da <= tol,
            da,
            "A_i does not match the per-case table",
        ));
        let dk = max_diff(&ss.k, &structures::expected_k(spec));
        out.push(CheckResult::of(
            format!("{label}: K table"),
            dk <= tol,
            dk,
            "K does not match the per-case list",
        ));
    }

    pub fn structural(spec: &CaseSpec, ss: &StructureSet, tol: f64, out: &mut Vec<CheckResult>) {
        let label = case_label(spec);
        let r2 = max_diff(&(&ss.r * &ss.r), &identity(16));
        out.push(CheckResult::of(
            format!("{label}: R^2 = 1"),
            r2 <= tol,
            r2,
            "",
        ));
        let gvec = crate::matrixcore::CVec::from_fn(16, |idx, _| ss.g[(idx / 4, idx % 4)]);
        let rg = (&ss.r * &gvec - &gvec).norm();
        out.push(CheckResult::of(
            format!("{label}: Rg = g"),
            rg <= tol,
            rg,
            "",
        ));
        let (rm, rp) = structures::r_rank_profile(ss);
        out.push(CheckResult::of(
            format!("{label}: rank(R-1)=6, rank(R+1)=10"),
            rm == 6 && rp == 10,
            0.0,
            format!("got ranks {rm}, {rp}"),
        ));
        let herm = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (ss.g[(i, j)].conj() - ss.g[(j, i)]).norm())
            .fold(0.0, f64::max);
        out.push(CheckResult::of(
            format!("{label}: conj(g^ik) = g^ki"),
            herm <= tol,
            herm,
            "",
        ));
        let vv = max_diff(&(&ss.v_inv * &ss.v), &identity(4));
        out.push(CheckResult::of(
            format!("{label}: V^-1 V = 1"),
            vv <= tol,
            vv,
            "",
        ));
        let cl = structures::clifford_residual(ss);
        out.push(CheckResult::of(
            format!("{label}: deformed Clifford relation"),
            cl <= tol,
            cl,
            "",
        ));
        let braid = structures::braid_residual(ss);
        // not part of the asserted identities; surfaced for information only
        out.push(CheckResult::pass(
            format!("{label}: braid residual = {braid:.2e} (informational)"),
            braid,
        ));
        let fsa = structures::f_selfadjointness_residual(ss);
        out.push(CheckResult::of(
            format!("{label}: F^t_r selfadjointness"),
            fsa <= tol,
            fsa,
            "",
        ));
    }

    pub fn calculus(spec: &CaseSpec, ss: &StructureSet, tol: f64, out: &mut Vec<CheckResult>) {
        let label = case_label(spec);
        let rt = match qalgebra::build_rewrite_table(&ss.r) {
            Ok(rt) => rt,
            Err(e) => {
                out.push(CheckResult::fail(
                    format!("{label}: rewrite table"),
                    f64::INFINITY,
                    e.to_string(),
                ));
                return;
            }
        };

        // PBW dimensions 10 / 20 / 35 at degrees 2 / 3 / 4
        let dims: Vec<usize> = (2..=4)
            .map(|d| qalgebra::pbw_dimension(&rt, d))
            .collect();
        out.push(CheckResult::of(
            format!("{label}: PBW dimensions deg 2/3/4"),
            dims == vec![10, 20, 35],
            0.0,
            format!("got {dims:?}"),
        ));

        // associativity on all generator triples
        let mut worst: f64 = 0.0;
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    let xa = Poly::generator(a);
                    let xb = Poly::generator(b);
                    let xc = Poly::generator(c);
                    let lhs = qalgebra::multiply(&qalgebra::multiply(&xa, &xb, &rt).unwrap(), &xc, &rt).unwrap();
                    let rhs = qalgebra::multiply(&xa, &qalgebra::multiply(&xb, &xc, &rt).unwrap(), &rt).unwrap();
                    worst = worst.max(lhs.max_coeff_diff(&rhs));
                }
            }
        }
        out.push(CheckResult::of(
            format!("{label}: associativity on generator triples"),
            worst <= tol,
            worst,
            "",
        ));

        // dirac^2 = laplacian and box-commutes-with-derivatives on monomials of degree <= 3
        let calc_tol = 1e-8;
        let mut worst_sq: f64 = 0.0;
        let mut worst_comm: f64 = 0.0;
        for mono in qalgebra::monomials_up_to_degree(3) {
            let f = Poly::monomial(mono, crate::matrixcore::cr(1.0));
            let box_f = qalgebra::laplacian(&f, ss, &rt).unwrap();
            for a in 0..4 {
                let phi = Bispinor::basis(a, f.clone());
                let dd = qalgebra::dirac_apply(&qalgebra::dirac_apply(&phi, ss, &rt).unwrap(), ss, &rt).unwrap();
                let want = Bispinor::basis(a, box_f.clone());
                worst_sq = worst_sq.max(dd.max_coeff_diff(&want));
            }
            for i in 0..4u8 {
                let lhs = qalgebra::laplacian(&qalgebra::derive(i, &f, ss, &rt).unwrap(), ss, &rt).unwrap();
                let rhs = qalgebra::derive(i, &box_f, ss, &rt).unwrap();
                worst_comm = worst_comm.max(lhs.max_coeff_diff(&rhs));
            }
        }
        out.push(CheckResult::of(
            format!("{label}: dirac^2 = laplacian (deg <= 3)"),
            worst_sq <= calc_tol,
            worst_sq,
            "",
        ));
        out.push(CheckResult::of(
            format!("{label}: laplacian commutes with derivatives"),
            worst_comm <= calc_tol,
            worst_comm,
            "",
        ));
        let _ = tol;
    }

    pub fn rewrite_residual(
        spec: &CaseSpec,
        ss: &StructureSet,
        rt: &RewriteTable,
        tol: f64,
        out: &mut Vec<CheckResult>,
    ) {
        let label = case_label(spec);
        let res = qalgebra::rewrite_table_residual(rt, &ss.r);
        out.push(CheckResult::of(
            format!("{label}: rewrite table residual"),
            res <= tol,
            res,
            "",
        ));
    }

    pub fn dirac(spec: &CaseSpec, ss: &StructureSet, out: &mut Vec<CheckResult>) {
        use crate::diracsolve::{self, RepKind, RepParams};
        let label = case_label(spec);
        let n = 12;
        let reps: Vec<(RepKind, RepParams)> = match spec.case_id {
            1 => vec![
                (RepKind::OneA, RepParams::new(1.0, 0.5, 1.0)),
                (RepKind::OneB, RepParams::new(1.0, 0.0, 1.0)),
            ],
            2 => vec![
                (RepKind::TwoA, RepParams::new(1.0, 0.0, 1.0)),
                (RepKind::TwoA, RepParams::new(0.0, 0.0, 1.0)),
                (RepKind::TwoB, RepParams::new(1.0, 0.0, 0.0)),
            ],
            _ => return,
        };
        for (kind, params) in reps {
            let tag = format!("{label} rep {kind:?} a={} b={} d={}", params.a, params.b, params.d);
            let rep = match diracsolve::build_rep(kind, params, n, spec) {
                Ok(rep) => rep,
                Err(e) => {
                    out.push(CheckResult::fail(tag, f64::INFINITY, e.to_string()));
                    continue;
                }
            };
            let rel = diracsolve::representation_residual(&rep, ss);
            out.push(CheckResult::of(
                format!("{tag}: momentum algebra relations"),
                rel <= 1e-8,
                rel,
                "",
            ));
            match diracsolve::printed_solution_residual(&rep, ss) {
                Ok((res, count)) => out.push(CheckResult::of(
                    format!("{tag}: printed solutions ({count}) satisfy (U-m)v = 0"),
                    res <= 1e-8,
                    res,
                    "",
                )),
                Err(e) => out.push(CheckResult::fail(tag.clone(), f64::INFINITY, e.to_string())),
            }
            match diracsolve::momenta_operators(&rep, ss, spec.case_id) {
                Ok(mo) => {
                    out.push(CheckResult::of(
                        format!("{tag}: Ptilde = Rtilde (+) Rtilde^*"),
                        mo.table_residual <= 1e-9,
                        mo.table_residual,
                        "",
                    ));
                }
                Err(e) => out.push(CheckResult::fail(
                    format!("{tag}: momenta"),
                    f64::INFINITY,
                    e.to_string(),
                )),
            }
        }
    }

    pub fn spectral(spec: &CaseSpec, ss: &StructureSet, out: &mut Vec<CheckResult>) {
        use crate::diracsolve::{self, MassRegime, RepKind, RepParams};
        let label = case_label(spec);
        let scenarios: Vec<(RepKind, RepParams, MassRegime)> = match spec.case_id {
            1 => vec![(
                RepKind::OneA,
                RepParams::new(1.0, 0.5, 1.0),
                MassRegime::Massive,
            )],
            2 => vec![
                (RepKind::TwoA, RepParams::new(1.0, 0.0, 1.0), MassRegime::Massive),
                (RepKind::TwoA, RepParams::new(0.0, 0.0, 1.0), MassRegime::Massless),
            ],
            _ => return,
        };
        for (kind, params, regime) in scenarios {
            let tag = format!("{label} {regime:?}");
            match diracsolve::check_spectral_claims(kind, params, 12, spec, ss, regime) {
                Ok(ok) => out.push(CheckResult::of(
                    format!("{tag}: spectral claims"),
                    ok,
                    0.0,
                    "spectral flags disagree with the expected truth table",
                )),
                Err(e) => out.push(CheckResult::fail(
                    format!("{tag}: spectral claims"),
                    f64::INFINITY,
                    e.to_string(),
                )),
            }
        }
    }

    pub fn classical_limit(tol: f64, out: &mut Vec<CheckResult>) {
        use crate::matrixcore::{cr, flip};
        let spec = CaseSpec::new(1).with_t(1.0);
        let ld = build_lorentz_data(&spec).unwrap();
        let ss = crate::structures::build_structures(&ld).unwrap();
        let dr = max_diff(&ss.r, &flip(4, 4));
        out.push(CheckResult::of("classical limit: R = tau", dr <= tol, dr, ""));
        let want = CMat::from_diagonal(&crate::matrixcore::CVec::from_vec(vec![
            cr(1.0),
            cr(-1.0),
            cr(-1.0),
            cr(-1.0),
        ]));
        let dg = max_diff(&ss.g, &want);
        out.push(CheckResult::of(
            "classical limit: g = diag(1,-1,-1,-1)",
            dg <= tol,
            dg,
            "",
        ));
        let mut df: f64 = 0.0;
        for t in 0..4 {
            for r_ in 0..4 {
                let want = if t == r_ {
                    identity(4)
                } else {
                    CMat::zeros(4, 4)
                };
                df = df.max(max_diff(&ss.f[t][r_], &want));
            }
        }
        out.push(CheckResult::of(
            "classical limit: F^t_r = delta 1",
            df <= tol,
            df,
            "",
        ));
        let planewaves = crate::diracsolve::classical_plane_wave_checks();
        out.push(CheckResult::of(
            "classical limit: plane-wave solution spans",
            planewaves.is_ok(),
            0.0,
            planewaves.err().map(|e| e.to_string()).unwrap_or_default(),
        ));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimFilter {
    All,
    Spectral,
}

/// Run the verification suite over `grid` (None = default grid).
pub fn run_verify(grid: Option<Vec<CaseSpec>>, tol: f64, claims: ClaimFilter) -> Vec<CheckResult> {
    let grid = grid.unwrap_or_else(default_grid);
    let mut out = Vec::new();
    for spec in &grid {
        let ld = match crate::catalog::build_lorentz_data(spec) {
            Ok(ld) => ld,
            Err(e) => {
                out.push(CheckResult::fail(
                    format!("{}: case data", case_label(spec)),
                    f64::INFINITY,
                    e.to_string(),
                ));
                continue;
            }
        };
        let ss = match crate::structures::build_structures(&ld) {
            Ok(ss) => ss,
            Err(e) => {
                out.push(CheckResult::fail(
                    format!("{}: structures", case_label(spec)),
                    f64::INFINITY,
                    e.to_string(),
                ));
                continue;
            }
        };
        if claims == ClaimFilter::All {
            checks::tables(spec, &ss, tol, &mut out);
            checks::structural(spec, &ss, tol, &mut out);
            if let Ok(rt) = crate::qalgebra::build_rewrite_table(&ss.r) {
                checks::rewrite_residual(spec, &ss, &rt, tol, &mut out);
            }
            checks::calculus(spec, &ss, tol, &mut out);
            checks::dirac(spec, &ss, &mut out);
        }
        checks::spectral(spec, &ss, &mut out);
    }
    if claims == ClaimFilter::All {
        checks::classical_limit(tol, &mut out);
    }
    out
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}
