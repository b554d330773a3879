//! The noncommutative coordinate algebra at Z = T = 0: PBW normal
//! ordering driven by a rewrite table extracted from the R-matrix, the
//! star involution, partial derivatives, Laplacian, Dirac operator and
//! the sesquilinear pairing on bispinors.

use std::collections::{BTreeMap, HashMap};

use crate::error::QminkError;
use crate::matrixcore::{cr, CMat, C64};
use crate::structures::StructureSet;

const PRUNE: f64 = 1e-13;

/// Exponents of the ordered monomial (x0)^a0 (x1)^a1 (x2)^a2 (x3)^a3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub [u8; 4]);

impl MultiIndex {
    pub const ONE: MultiIndex = MultiIndex([0; 4]);

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Letters of the normal-form word, lowest-precedence generator first.
    pub fn word(&self) -> Vec<u8> {
        let mut w = Vec::with_capacity(self.degree() as usize);
        for &g in &GEN_ORDER {
            for _ in 0..self.0[g as usize] {
                w.push(g);
            }
        }
        w
    }

    pub fn from_sorted_word(word: &[u8]) -> MultiIndex {
        let mut exps = [0u8; 4];
        for &g in word {
            exps[g as usize] += 1;
        }
        MultiIndex(exps)
    }
}

/// Element of the coordinate algebra in PBW normal form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    pub terms: BTreeMap<MultiIndex, C64>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::monomial(MultiIndex::ONE, cr(1.0))
    }

    pub fn generator(i: u8) -> Poly {
        assert!(i < 4);
        let mut exps = [0u8; 4];
        exps[i as usize] = 1;
        Poly::monomial(MultiIndex(exps), cr(1.0))
    }

    pub fn monomial(idx: MultiIndex, coeff: C64) -> Poly {
        let mut p = Poly::default();
        p.add_term(idx, coeff);
        p
    }

    pub fn add_term(&mut self, idx: MultiIndex, coeff: C64) {
        let entry = self.terms.entry(idx).or_insert_with(C64::default);
        *entry += coeff;
        if entry.norm() < PRUNE {
            self.terms.remove(&idx);
        }
    }

    pub fn add_poly(&mut self, other: &Poly) {
        for (&idx, &c) in &other.terms {
            self.add_term(idx, c);
        }
    }

    pub fn scale(&self, factor: C64) -> Poly {
        let mut out = Poly::default();
        for (&idx, &c) in &self.terms {
            out.add_term(idx, c * factor);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let mut worst: f64 = 0.0;
        for (&idx, &c) in &self.terms {
            let o = other.terms.get(&idx).copied().unwrap_or_default();
            worst = worst.max((c - o).norm());
        }
        for (&idx, &c) in &other.terms {
            if !self.terms.contains_key(&idx) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Poly, tol: f64) -> bool {
        self.max_coeff_diff(other) <= tol
    }
}

/// Rewrite rules for disordered adjacent pairs -> sums of ordered pairs,
/// with a cache of normal forms computed from them.
#[derive(Debug)]
pub struct RewriteTable {
    rules: HashMap<(u8, u8), Vec<((u8, u8), C64)>>,
    levels: std::cell::RefCell<Vec<Level>>,
}

/// Generator precedence used for normal forms: words are sorted as
/// x0 < x1 < x3 < x2. With the natural order x0 < x1 < x2 < x3 the
/// ordered monomials of one case family become linearly dependent in
/// degree 3 (they span a 19-dimensional subspace of the 20-dimensional
/// cubic part), so they cannot serve as a basis; swapping x2 and x3
/// restores a valid monomial basis for every case family.
pub const GEN_ORDER: [u8; 4] = [0, 1, 3, 2];

/// prec(g): position of generator g in [`GEN_ORDER`].
const PREC: [u8; 4] = [0, 1, 3, 2];

/// Adjacent pairs (g, h) with prec(g) > prec(h), i.e. the products
/// x^g x^h that need rewriting.
const DISORDERED: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (2, 3)];

/// Gaussian elimination on the row space of R - 1, pivoting on the six
/// disordered quadratic monomials.
pub fn build_rewrite_table(r: &CMat) -> Result<RewriteTable, QminkError> {
    assert_eq!(r.shape(), (16, 16));
    let ordered: Vec<(usize, usize)> = (0..4)
        .flat_map(|a| (a..4).map(move |b| (GEN_ORDER[a] as usize, GEN_ORDER[b] as usize)))
        .collect();
    assert_eq!(ordered.len(), 10);
    // permuted columns: 6 disordered then 10 ordered
    let col_of = |pair: (usize, usize)| 4 * pair.0 + pair.1;
    let mut m = vec![[C64::default(); 16]; 16];
    for row in 0..16 {
        for (p, &pair) in DISORDERED.iter().chain(ordered.iter()).enumerate() {
            let rm1 = r[(row, col_of(pair))] - if row == col_of(pair) { cr(1.0) } else { cr(0.0) };
            m[row][p] = rm1;
        }
    }

    let scale = r.norm().max(1.0);
    let tol = 1e-9 * scale;
    let mut pivot_row = 0usize;
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..16 {
        // partial pivoting
        let (best, best_val) = (pivot_row..16)
            .map(|rr| (rr, m[rr][col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((pivot_row, 0.0));
        if best_val <= tol {
            continue;
        }
        m.swap(pivot_row, best);
        let inv = cr(1.0) / m[pivot_row][col];
        for cc in 0..16 {
            m[pivot_row][cc] *= inv;
        }
        for rr in 0..16 {
            if rr != pivot_row {
                let factor = m[rr][col];
                if factor.norm() > 0.0 {
                    for cc in 0..16 {
                        let sub = factor * m[pivot_row][cc];
                        m[rr][cc] -= sub;
                    }
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == 16 {
            break;
        }
    }

    if pivots.len() != 6 {
        return Err(QminkError::PivotFailure(format!(
            "rank of R - 1 is {}, expected 6",
            pivots.len()
        )));
    }
    if pivots.iter().any(|&p| p >= 6) {
        return Err(QminkError::PivotFailure(
            "a relation involves only ordered monomials; PBW basis assumption broken".into(),
        ));
    }

    let mut rules = HashMap::new();
    for (rowi, &p) in pivots.iter().enumerate() {
        let (i, j) = DISORDERED[p];
        let mut rhs = Vec::new();
        for (q, &(k, l)) in ordered.iter().enumerate() {
            let coeff = -m[rowi][6 + q];
            if coeff.norm() > PRUNE {
                rhs.push(((k as u8, l as u8), coeff));
            }
        }
        rules.insert((i as u8, j as u8), rhs);
    }
    Ok(RewriteTable {
        rules,
        levels: std::cell::RefCell::new(Vec::new()),
    })
}

/// Human-readable dump of the rewrite rules.
pub fn debug_rules(rt: &RewriteTable) -> String {
    let mut out = String::new();
    for &(i, j) in &DISORDERED {
        out += &format!("x{}x{} ->", i, j);
        for &((k, l), c) in &rt.rules[&(i as u8, j as u8)] {
            out += &format!(" + ({:.4}{:+.4}i) x{}x{}", c.re, c.im, k, l);
        }
        out.push('\n');
    }
    out
}

/// Residual of substituting the table back into (R-1)(x (x) x).
pub fn rewrite_table_residual(rt: &RewriteTable, r: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for row in 0..16 {
        let mut acc: HashMap<(u8, u8), C64> = HashMap::new();
        for k in 0..4u8 {
            for l in 0..4u8 {
                let coeff =
                    r[(row, (4 * k + l) as usize)] - if row == (4 * k + l) as usize { cr(1.0) } else { cr(0.0) };
                if coeff.norm() < PRUNE {
                    continue;
                }
                if PREC[k as usize] > PREC[l as usize] {
                    for &((a, b), c) in &rt.rules[&(k, l)] {
                        *acc.entry((a, b)).or_default() += coeff * c;
                    }
                } else {
                    *acc.entry((k, l)).or_default() += coeff;
                }
            }
        }
        for (_, v) in acc {
            worst = worst.max(v.norm());
        }
    }
    worst
}

/// Monomials of degree exactly `d`, in a fixed deterministic order.
fn monomials_of_degree(d: u8) -> Vec<MultiIndex> {
    monomials_up_to_degree(d)
        .into_iter()
        .filter(|m| m.degree() == d as u32)
        .collect()
}

#[derive(Debug)]
struct Level {
    /// mats[g] sends degree-d normal forms to the normal form of x_g
    /// times them (degree d+1)
    mats: [CMat; 4],
    in_index: HashMap<MultiIndex, usize>,
    out_monos: Vec<MultiIndex>,

}

const MAX_DEGREE: usize = 64;

/// Leading (lowest-precedence) letter of a nonconstant normal-form word.
fn min_letter(m: MultiIndex) -> u8 {
    *GEN_ORDER.iter().find(|&&g| m.0[g as usize] > 0).unwrap()
}

fn bump(m: MultiIndex, g: u8) -> MultiIndex {
    let mut out = m;
    out.0[g as usize] += 1;
    out
}

fn strip(m: MultiIndex, g: u8) -> MultiIndex {
    let mut out = m;
    out.0[g as usize] -= 1;
    out
}

/// Extend the cached generator-multiplication operators up to inputs of
/// degree `d`.
///
/// Straightening words one adjacent swap at a time can revisit the same
/// word with amplifying coefficients, so iterative rewriting diverges on
/// some of the q = -1 cases even though normal forms are unique. Instead
/// the operators L_g = "multiply by x_g, then normal order" are computed
/// degree by degree: on a degree-d ordered monomial m = x_j w with j
/// minimal, either g <= j and x_g m is already ordered, or the rewrite
/// rule for (g, j) expresses L_g(m) through lower-degree data and other
/// L_k(m'') of the same degree. That closes into a modest linear system
/// over the unknown columns, solved exactly.
fn ensure_level(rt: &RewriteTable, d: usize) -> Result<(), QminkError> {
    if rt.levels.borrow().len() > d {
        return Ok(());
    }
    if d > MAX_DEGREE {
        return Err(QminkError::NonTermination(vec![d as u8]));
    }
    let start = rt.levels.borrow().len();
    for lvl in start..=d {
        let level = build_level(rt, lvl)?;
        rt.levels.borrow_mut().push(level);
    }
    Ok(())
}

fn build_level(rt: &RewriteTable, d: usize) -> Result<Level, QminkError> {
    let in_monos = monomials_of_degree(d as u8);
    let out_monos = monomials_of_degree(d as u8 + 1);
    let in_index: HashMap<MultiIndex, usize> =
        in_monos.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let out_index: HashMap<MultiIndex, usize> =
        out_monos.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let n_in = in_monos.len();
    let n_out = out_monos.len();
    let mut mats: [CMat; 4] = std::array::from_fn(|_| CMat::zeros(n_out, n_in));

    if d == 0 {
        for g in 0..4usize {
            let mono = bump(MultiIndex::ONE, g as u8);
            mats[g][(out_index[&mono], 0)] = cr(1.0);
        }
        return Ok(Level { mats, in_index, out_monos });
    }

    // trivial columns: g does not pass the leading letter
    let mut unknowns: Vec<(u8, MultiIndex)> = Vec::new();
    let mut unknown_index: HashMap<(u8, MultiIndex), usize> = HashMap::new();
    for g in 0..4u8 {
        for &m in &in_monos {
            if PREC[g as usize] <= PREC[min_letter(m) as usize] {
                mats[g as usize][(out_index[&bump(m, g)], in_index[&m])] = cr(1.0);
            } else {
                unknown_index.insert((g, m), unknowns.len());
                unknowns.push((g, m));
            }
        }
    }
    if unknowns.is_empty() {
        return Ok(Level { mats, in_index, out_monos });
    }

    // Each unknown column L_g(m) with m = x_j w (j the leading letter,
    // prec(g) > prec(j)) unfolds through the rewrite rule for (g, j):
    // x_g m = sum c_{gj->kl} x_k nf(x_l w), where nf(x_l w) is known from
    // the previous level. The x_k factors hit either ordered monomials
    // (known) or other unknowns of the same level, giving a square linear
    // system (1 - A) X = B solved by LU with iterative refinement.
    let levels = rt.levels.borrow();
    let prev = &levels[d - 1];
    let nu = unknowns.len();
    let mut lhs = CMat::identity(nu, nu);
    let mut rhs = CMat::zeros(nu, n_out);
    for (u, &(g, m)) in unknowns.iter().enumerate() {
        let j = min_letter(m);
        let wi = prev.in_index[&strip(m, j)];
        for &((k, l), coeff) in &rt.rules[&(g, j)] {
            let col = prev.mats[l as usize].column(wi);
            for (mi, &mpp) in in_monos.iter().enumerate() {
                let amp = coeff * col[mi];
                if amp.norm() < PRUNE {
                    continue;
                }
                if PREC[k as usize] <= PREC[min_letter(mpp) as usize] {
                    rhs[(u, out_index[&bump(mpp, k)])] += amp;
                } else {
                    lhs[(u, unknown_index[&(k, mpp)])] -= amp;
                }
            }
        }
    }
    drop(levels);

    let lu = lhs.clone().lu();
    let mut solved = lu.solve(&rhs).ok_or_else(|| {
        QminkError::PivotFailure(format!("straightening system at degree {d} is singular"))
    })?;
    for _ in 0..2 {
        let resid = &rhs - &lhs * &solved;
        match lu.solve(&resid) {
            Some(corr) => solved += corr,
            None => break,
        }
    }
    let residual = (&lhs * &solved - &rhs).norm();
    if residual > 1e-8 * rhs.norm().max(1.0) {
        return Err(QminkError::PivotFailure(format!(
            "straightening system at degree {d} is inconsistent (residual {residual:.2e})"
        )));
    }
    for (u, &(g, m)) in unknowns.iter().enumerate() {
        let col = in_index[&m];
        for o in 0..n_out {
            let v = solved[(u, o)];
            if v.norm() >= PRUNE {
                mats[g as usize][(o, col)] = v;
            }
        }
    }
    Ok(Level { mats, in_index, out_monos })
}

/// Normal form of x_g times a normal-form polynomial.
fn apply_generator(g: u8, p: &Poly, rt: &RewriteTable) -> Result<Poly, QminkError> {
    let mut out = Poly::default();
    for (&idx, &coeff) in &p.terms {
        let d = idx.degree() as usize;
        ensure_level(rt, d)?;
        let levels = rt.levels.borrow();
        let level = &levels[d];
        let col = level.mats[g as usize].column(level.in_index[&idx]);
        for (row, &mono) in level.out_monos.iter().enumerate() {
            let v = col[row];
            if v.norm() >= PRUNE {
                out.add_term(mono, coeff * v);
            }
        }
    }
    Ok(out)
}

/// Normal order an arbitrary word of generators.
pub fn normal_order_word(word: &[u8], rt: &RewriteTable) -> Result<Poly, QminkError> {
    let mut p = Poly::one();
    for &g in word.iter().rev() {
        p = apply_generator(g, &p, rt)?;
    }
    Ok(p)
}

/// Product in the coordinate algebra.
pub fn multiply(a: &Poly, b: &Poly, rt: &RewriteTable) -> Result<Poly, QminkError> {
    let mut out = Poly::default();
    for (ia, &ca) in &a.terms {
        for (ib, &cb) in &b.terms {
            let mut word = ia.word();
            word.extend(ib.word());
            let nf = normal_order_word(&word, rt)?;
            out.add_poly(&nf.scale(ca * cb));
        }
    }
    Ok(out)
}

/// Star involution: conjugate coefficients, reverse words, renormalize.
pub fn star(a: &Poly, rt: &RewriteTable) -> Result<Poly, QminkError> {
    let mut out = Poly::default();
    for (idx, &c) in &a.terms {
        let mut word = idx.word();
        word.reverse();
        let nf = normal_order_word(&word, rt)?;
        out.add_poly(&nf.scale(c.conj()));
    }
    Ok(out)
}

fn derive_monomial(
    i: u8,
    idx: MultiIndex,
    ss: &StructureSet,
    rt: &RewriteTable,
    cache: &mut HashMap<(u8, MultiIndex), Poly>,
) -> Result<Poly, QminkError> {
    if idx.degree() == 0 {
        return Ok(Poly::zero());
    }
    if let Some(hit) = cache.get(&(i, idx)) {
        return Ok(hit.clone());
    }
    // peel the leading (lowest-precedence) generator of the normal form
    let k = min_letter(idx) as usize;
    let mut rest = idx;
    rest.0[k] -= 1;

    let mut out = Poly::default();
    if k as u8 == i {
        out.add_term(rest, cr(1.0));
    }
    for l in 0..4u8 {
        let dl = derive_monomial(l, rest, ss, rt, cache)?;
        if dl.is_zero() {
            continue;
        }
        for n in 0..4u8 {
            let coeff = ss.r[(4 * k + l as usize, (4 * i + n) as usize)];
            if coeff.norm() < PRUNE {
                continue;
            }
            let shifted = multiply(&Poly::generator(n), &dl, rt)?;
            out.add_poly(&shifted.scale(coeff));
        }
    }
    cache.insert((i, idx), out.clone());
    Ok(out)
}

/// Partial derivative determined by d_i(x^k f) = delta^k_i f + R^{kl}_{in} x^n d_l f.
pub fn derive(i: u8, f: &Poly, ss: &StructureSet, rt: &RewriteTable) -> Result<Poly, QminkError> {
    let mut cache = HashMap::new();
    let mut out = Poly::default();
    for (&idx, &c) in &f.terms {
        let d = derive_monomial(i, idx, ss, rt, &mut cache)?;
        out.add_poly(&d.scale(c));
    }
    Ok(out)
}

/// Laplacian g^{ij} d_j d_i.
pub fn laplacian(f: &Poly, ss: &StructureSet, rt: &RewriteTable) -> Result<Poly, QminkError> {
    let mut out = Poly::default();
    for i in 0..4u8 {
        let di = derive(i, f, ss, rt)?;
        if di.is_zero() {
            continue;
        }
        for j in 0..4u8 {
            let coeff = ss.g[(i as usize, j as usize)];
            if coeff.norm() < PRUNE {
                continue;
            }
            let dj = derive(j, &di, ss, rt)?;
            out.add_poly(&dj.scale(coeff));
        }
    }
    Ok(out)
}

/// Element of C^4 (x) C, the space the Dirac operator acts on.
#[derive(Debug, Clone, Default)]
pub struct Bispinor {
    pub components: [Poly; 4],
}

impl Bispinor {
    pub fn basis(a: usize, f: Poly) -> Bispinor {
        let mut b = Bispinor::default();
        b.components[a] = f;
        b
    }

    pub fn scale(&self, factor: C64) -> Bispinor {
        Bispinor {
            components: std::array::from_fn(|a| self.components[a].scale(factor)),
        }
    }

    pub fn sub(&self, other: &Bispinor) -> Bispinor {
        let mut out = self.clone();
        for a in 0..4 {
            out.components[a].add_poly(&other.components[a].scale(cr(-1.0)));
        }
        out
    }

    pub fn max_coeff_diff(&self, other: &Bispinor) -> f64 {
        (0..4)
            .map(|a| self.components[a].max_coeff_diff(&other.components[a]))
            .fold(0.0, f64::max)
    }
}

/// Dirac operator: (d-slash phi)^s = (gamma^i)^s_a d_i(phi^a).
pub fn dirac_apply(
    phi: &Bispinor,
    ss: &StructureSet,
    rt: &RewriteTable,
) -> Result<Bispinor, QminkError> {
    let mut out = Bispinor::default();
    for i in 0..4u8 {
        for a in 0..4usize {
            if phi.components[a].is_zero() {
                continue;
            }
            let d = derive(i, &phi.components[a], ss, rt)?;
            if d.is_zero() {
                continue;
            }
            for s in 0..4usize {
                let coeff = ss.gamma[i as usize][(s, a)];
                if coeff.norm() < PRUNE {
                    continue;
                }
                out.components[s].add_poly(&d.scale(coeff));
            }
        }
    }
    Ok(out)
}

/// Sesquilinear pairing phi-bar chi = A_{ab} (phi^a)^* chi^b.
pub fn pairing(
    phi: &Bispinor,
    chi: &Bispinor,
    ss: &StructureSet,
    rt: &RewriteTable,
) -> Result<Poly, QminkError> {
    let mut out = Poly::default();
    for a in 0..4 {
        if phi.components[a].is_zero() {
            continue;
        }
        let starred = star(&phi.components[a], rt)?;
        for b in 0..4 {
            let coeff = ss.a_bisp[(a, b)];
            if coeff.norm() < PRUNE || chi.components[b].is_zero() {
                continue;
            }
            let prod = multiply(&starred, &chi.components[b], rt)?;
            out.add_poly(&prod.scale(coeff));
        }
    }
    Ok(out)
}

/// Deformed Lagrangian density phi-bar (i d-slash - m) phi.
pub fn lagrangian(
    phi: &Bispinor,
    m: f64,
    ss: &StructureSet,
    rt: &RewriteTable,
) -> Result<Poly, QminkError> {
    assert!(m >= 0.0);
    let slashed = dirac_apply(phi, ss, rt)?;
    let rhs = slashed
        .scale(crate::matrixcore::I)
        .sub(&phi.scale(cr(m)));
    pairing(phi, &rhs, ss, rt)
}

/// All monomials of degree <= max_deg, lexicographic.
pub fn monomials_up_to_degree(max_deg: u8) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for a0 in 0..=max_deg {
        for a1 in 0..=max_deg - a0 {
            for a2 in 0..=max_deg - a0 - a1 {
                for a3 in 0..=max_deg - a0 - a1 - a2 {
                    out.push(MultiIndex([a0, a1, a2, a3]));
                }
            }
        }
    }
    out
}

/// Dimension of the span of normal forms of all degree-d generator words.
pub fn pbw_dimension(rt: &RewriteTable, d: u8) -> usize {
    let mut words = vec![Vec::new()];
    for _ in 0..d {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..4u8).map(move |g| {
                    let mut nw = w.clone();
                    nw.push(g);
                    nw
                })
            })
            .collect();
    }
    // rank of the (words x ordered monomials) coefficient matrix
    let monos: Vec<MultiIndex> = monomials_up_to_degree(d)
        .into_iter()
        .filter(|m| m.degree() == d as u32)
        .collect();
    let col_of: HashMap<MultiIndex, usize> =
        monos.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut m = CMat::zeros(words.len(), monos.len());
    for (wi, w) in words.iter().enumerate() {
        let nf = normal_order_word(w, rt).expect("rewrite cap hit during PBW scan");
        for (idx, &c) in &nf.terms {
            m[(wi, col_of[idx])] = c;
        }
    }
    crate::matrixcore::rank(&m, 1e-7 * m.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_lorentz_data, CaseSpec};
    use crate::matrixcore::{c, flip};
    use crate::structures::build_structures;

    fn setup(spec: &CaseSpec) -> (StructureSet, RewriteTable) {
        let ss = build_structures(&build_lorentz_data(spec).unwrap()).unwrap();
        let rt = build_rewrite_table(&ss.r).unwrap();
        (ss, rt)
    }

    fn classical() -> (StructureSet, RewriteTable) {
        setup(&CaseSpec::new(1).with_t(1.0))
    }

    #[test]
    fn classical_table_is_commutative() {
        let rt = build_rewrite_table(&flip(4, 4)).unwrap();
        for &(i, j) in &DISORDERED {
            let rhs = &rt.rules[&(i as u8, j as u8)];
            assert_eq!(rhs.len(), 1);
            assert_eq!(rhs[0].0, (j as u8, i as u8));
            assert!((rhs[0].1 - cr(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rewrite_residual_case1() {
        let (ss, rt) = setup(&CaseSpec::new(1).with_t(0.7));
        assert!(rewrite_table_residual(&rt, &ss.r) < 1e-9);
    }

    #[test]
    fn table_shape() {
        let (_, rt) = setup(&CaseSpec::new(3).with_c(1.0).with_r(1.5));
        assert_eq!(rt.rules.len(), 6);
        for rhs in rt.rules.values() {
            assert!(rhs
                .iter()
                .all(|&((k, l), _)| PREC[k as usize] <= PREC[l as usize]));
        }
    }

    #[test]
    fn multiply_ordered_passthrough() {
        let (_, rt) = setup(&CaseSpec::new(1).with_t(0.7));
        let p = multiply(&Poly::generator(0), &Poly::generator(1), &rt).unwrap();
        assert_eq!(p.terms.len(), 1);
        let (idx, coeff) = p.terms.iter().next().unwrap();
        assert_eq!(idx.0, [1, 1, 0, 0]);
        assert!((coeff - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn classical_commutativity() {
        let (_, rt) = classical();
        let p = multiply(&Poly::generator(1), &Poly::generator(0), &rt).unwrap();
        let q = multiply(&Poly::generator(0), &Poly::generator(1), &rt).unwrap();
        assert!(p.approx_eq(&q, 1e-12));
    }

    #[test]
    fn star_examples() {
        let (_, rt) = classical();
        let x0 = Poly::generator(0);
        assert!(star(&x0, &rt).unwrap().approx_eq(&x0, 1e-12));

        let (_, rt) = setup(&CaseSpec::new(1).with_t(0.7));
        // ((2+i) x0 x1)^* = (2-i) * normal_form(x1 x0)
        let x0x1 = normal_order_word(&[0, 1], &rt).unwrap();
        let p = x0x1.scale(c(2.0, 1.0));
        let starred = star(&p, &rt).unwrap();
        let want = normal_order_word(&[1, 0], &rt).unwrap().scale(c(2.0, -1.0));
        assert!(starred.approx_eq(&want, 1e-12));
    }

    #[test]
    fn star_involution_and_antimultiplicativity() {
        for spec in [
            CaseSpec::new(1).with_t(0.7),
            CaseSpec::new(4).with_c(0.5),
            CaseSpec::new(6).with_c(2.0),
        ] {
            let (_, rt) = setup(&spec);
            let mut k = 1u64;
            let mut rand = move || {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((k >> 33) as f64 / (1u64 << 31) as f64) - 1.0
            };
            for _ in 0..10 {
                let mut a = Poly::default();
                let mut b = Poly::default();
                for idx in monomials_up_to_degree(2) {
                    a.add_term(idx, c(rand(), rand()));
                    b.add_term(idx, c(rand(), rand()));
                }
                let ss = star(&star(&a, &rt).unwrap(), &rt).unwrap();
                assert!(ss.approx_eq(&a, 1e-9), "star is not an involution");

                let lhs = star(&multiply(&a, &b, &rt).unwrap(), &rt).unwrap();
                let rhs = multiply(&star(&b, &rt).unwrap(), &star(&a, &rt).unwrap(), &rt).unwrap();
                assert!(lhs.approx_eq(&rhs, 1e-9), "star is not antimultiplicative");
            }
        }
    }

    #[test]
    fn derive_basics() {
        let (ss, rt) = setup(&CaseSpec::new(1).with_t(0.7));
        for i in 0..4u8 {
            assert!(derive(i, &Poly::one(), &ss, &rt).unwrap().is_zero());
            for k in 0..4u8 {
                let d = derive(i, &Poly::generator(k), &ss, &rt).unwrap();
                let want = if i == k { Poly::one() } else { Poly::zero() };
                assert!(d.approx_eq(&want, 1e-12));
            }
        }
    }

    #[test]
    fn derive_classical_square() {
        let (ss, rt) = classical();
        let x0sq = multiply(&Poly::generator(0), &Poly::generator(0), &rt).unwrap();
        let d = derive(0, &x0sq, &ss, &rt).unwrap();
        let want = Poly::generator(0).scale(cr(2.0));
        assert!(d.approx_eq(&want, 1e-12));
    }

    #[test]
    fn derive_one_unrolling() {
        // d_i(x^k x^l) = delta^k_i x^l + R^{kl}_{in} x^n, case 1, t = 0.7
        let (ss, rt) = setup(&CaseSpec::new(1).with_t(0.7));
        for i in 0..4u8 {
            for k in 0..4u8 {
                for l in 0..4u8 {
                    let prod =
                        multiply(&Poly::generator(k), &Poly::generator(l), &rt).unwrap();
                    let lhs = derive(i, &prod, &ss, &rt).unwrap();
                    let mut want = Poly::default();
                    if k == i {
                        want.add_poly(&Poly::generator(l));
                    }
                    for n in 0..4u8 {
                        let coeff = ss.r[((4 * k + l) as usize, (4 * i + n) as usize)];
                        want.add_poly(&Poly::generator(n).scale(coeff));
                    }
                    assert!(
                        lhs.approx_eq(&want, 1e-9),
                        "i={} k={} l={}: {:?} vs {:?}",
                        i,
                        k,
                        l,
                        lhs,
                        want
                    );
                }
            }
        }
    }

    #[test]
    fn derive_reduces_degree_by_one() {
        let (ss, rt) = setup(&CaseSpec::new(2).with_c(1.0));
        for idx in monomials_up_to_degree(3) {
            if idx.degree() == 0 {
                continue;
            }
            let f = Poly::monomial(idx, cr(1.0));
            for i in 0..4u8 {
                let d = derive(i, &f, &ss, &rt).unwrap();
                if !d.is_zero() {
                    assert!(d.terms.keys().all(|m| m.degree() == idx.degree() - 1));
                }
            }
        }
    }

    #[test]
    fn laplacian_classical() {
        let (ss, rt) = classical();
        let x0sq = multiply(&Poly::generator(0), &Poly::generator(0), &rt).unwrap();
        let got = laplacian(&x0sq, &ss, &rt).unwrap();
        assert!(got.approx_eq(&Poly::one().scale(cr(2.0)), 1e-12));

        let x0x1 = multiply(&Poly::generator(0), &Poly::generator(1), &rt).unwrap();
        assert!(laplacian(&x0x1, &ss, &rt).unwrap().is_zero());
    }

    #[test]
    fn dirac_on_constants_and_generators() {
        let (ss, rt) = classical();
        for a in 0..4 {
            let phi = Bispinor::basis(a, Poly::one());
            let out = dirac_apply(&phi, &ss, &rt).unwrap();
            assert!(out.max_coeff_diff(&Bispinor::default()) < 1e-12);
        }
        // classical: dirac(eps_1 (x) x0) follows column 1 of gamma0
        let phi = Bispinor::basis(0, Poly::generator(0));
        let out = dirac_apply(&phi, &ss, &rt).unwrap();
        for s in 0..4 {
            let want = Poly::one().scale(ss.gamma[0][(s, 0)]);
            assert!(out.components[s].approx_eq(&want, 1e-12));
        }
    }

    #[test]
    fn dirac_squared_equals_laplacian_sample() {
        for spec in [
            CaseSpec::new(1).with_t(0.7),
            CaseSpec::new(5).with_t(0.3),
            CaseSpec::new(7).with_t(0.7),
        ] {
            let (ss, rt) = setup(&spec);
            for idx in monomials_up_to_degree(3) {
                let f = Poly::monomial(idx, cr(1.0));
                let box_f = laplacian(&f, &ss, &rt).unwrap();
                for a in 0..4 {
                    let phi = Bispinor::basis(a, f.clone());
                    let dd =
                        dirac_apply(&dirac_apply(&phi, &ss, &rt).unwrap(), &ss, &rt).unwrap();
                    let want = Bispinor::basis(a, box_f.clone());
                    assert!(
                        dd.max_coeff_diff(&want) < 1e-8,
                        "case {} idx {:?} a={}",
                        spec.case_id,
                        idx,
                        a
                    );
                }
            }
        }
    }

    #[test]
    fn pairing_examples() {
        let (ss, rt) = classical();
        let e1 = Bispinor::basis(0, Poly::one());
        // A is off-diagonal-block, so the (1,1) pairing vanishes
        assert!(pairing(&e1, &e1, &ss, &rt).unwrap().is_zero());
        // pairing with eps_3 picks up a K entry (K = 1 for case 1)
        let e3 = Bispinor::basis(2, Poly::one());
        let p = pairing(&e1, &e3, &ss, &rt).unwrap();
        assert!(p.approx_eq(&Poly::one(), 1e-12));
    }

    #[test]
    fn pairing_hermiticity() {
        for spec in [CaseSpec::new(1).with_t(0.7), CaseSpec::new(3).with_c(0.5).with_r(1.5)] {
            let (ss, rt) = setup(&spec);
            let mut k = 7u64;
            let mut rand = move || {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((k >> 33) as f64 / (1u64 << 31) as f64) - 1.0
            };
            for _ in 0..5 {
                let mut phi = Bispinor::default();
                let mut chi = Bispinor::default();
                for a in 0..4 {
                    for idx in monomials_up_to_degree(2) {
                        phi.components[a].add_term(idx, c(rand(), rand()));
                        chi.components[a].add_term(idx, c(rand(), rand()));
                    }
                }
                let lhs = star(&pairing(&phi, &chi, &ss, &rt).unwrap(), &rt).unwrap();
                let rhs = pairing(&chi, &phi, &ss, &rt).unwrap();
                assert!(lhs.approx_eq(&rhs, 1e-8));
            }
        }
    }

    #[test]
    fn lagrangian_examples() {
        let (ss, rt) = classical();
        for a in 0..4 {
            let phi = Bispinor::basis(a, Poly::one());
            assert!(lagrangian(&phi, 0.0, &ss, &rt).unwrap().is_zero());
            assert!(lagrangian(&phi, 1.0, &ss, &rt).unwrap().is_zero());
        }
    }

    #[test]
    fn lagrangian_linear_in_mass() {
        let (ss, rt) = setup(&CaseSpec::new(2).with_c(1.0));
        let mut phi = Bispinor::default();
        for a in 0..4 {
            phi.components[a] = Poly::monomial(MultiIndex([a as u8, 0, 1, 0]), c(0.3 * a as f64 + 0.1, 0.2));
        }
        let m = 1.7;
        let lm = lagrangian(&phi, m, &ss, &rt).unwrap();
        let l0 = lagrangian(&phi, 0.0, &ss, &rt).unwrap();
        let pp = pairing(&phi, &phi, &ss, &rt).unwrap();
        let mut want = l0;
        want.add_poly(&pp.scale(cr(-m)));
        assert!(lm.approx_eq(&want, 1e-9));
    }

    #[test]
    fn pbw_dimensions() {
        for spec in [
            CaseSpec::new(1).with_t(0.7),
            CaseSpec::new(6).with_c(2.0),
        ] {
            let (_, rt) = setup(&spec);
            assert_eq!(pbw_dimension(&rt, 2), 10);
            assert_eq!(pbw_dimension(&rt, 3), 20);
            assert_eq!(pbw_dimension(&rt, 4), 35);
        }
    }
}
