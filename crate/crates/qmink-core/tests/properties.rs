//! Property-based checks: tensor-algebra identities of the matrix core,
//! involutivity of the star operation, associativity of the noncommutative
//! product on random polynomials, and parse/print round trips.

use proptest::prelude::*;

use qmink_core::matrixcore::{c, flip, identity, kron, kron_vec, max_diff, CMat, CVec};
use qmink_core::qalgebra::{self, MultiIndex, Poly, RewriteTable};
use qmink_core::text::{parse_poly, print_poly};
use qmink_core::verify::default_grid;
use qmink_core::{build_lorentz_data, build_structures, CaseSpec};

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols).prop_map(move |v| {
        CMat::from_fn(rows, cols, |i, j| {
            let (re, im) = v[i * cols + j];
            c(re, im)
        })
    })
}

fn cvec(n: usize) -> impl Strategy<Value = CVec> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n)
        .prop_map(|v| CVec::from_fn(v.len(), |i, _| c(v[i].0, v[i].1)))
}

/// Polynomial with small integer coefficients and terms of degree <= `max_deg`.
fn poly(max_deg: usize, max_terms: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(
        (
            proptest::collection::vec(0u8..4, 0..=max_deg),
            -3i32..=3,
            -3i32..=3,
        ),
        1..=max_terms,
    )
    .prop_map(|terms| {
        let mut p = Poly::zero();
        for (word, re, im) in terms {
            let mut counts = [0u8; 4];
            for g in word {
                counts[g as usize] += 1;
            }
            p.add_term(MultiIndex(counts), c(re as f64, im as f64));
        }
        p
    })
}

fn case_table(index: usize) -> (CaseSpec, RewriteTable) {
    let spec = default_grid().swap_remove(index);
    let ld = build_lorentz_data(&spec).expect("case data");
    let ss = build_structures(&ld).expect("structures");
    let rt = qalgebra::build_rewrite_table(&ss.r).expect("rewrite table");
    (spec, rt)
}

proptest! {
    #[test]
    fn kron_mixed_product(a in cmat(2, 3), b in cmat(3, 2), x in cmat(3, 2), y in cmat(2, 3)) {
        let lhs = kron(&a, &b) * kron(&x, &y);
        let rhs = kron(&(&a * &x), &(&b * &y));
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn flip_swaps_tensor_factors(a in cvec(3), b in cvec(4)) {
        let swapped = flip(3, 4) * kron_vec(&a, &b);
        prop_assert!((swapped - kron_vec(&b, &a)).norm() < 1e-12);
        prop_assert!(max_diff(&(flip(4, 3) * flip(3, 4)), &identity(12)) < 1e-12);
    }

    #[test]
    fn parse_print_round_trip(p in poly(3, 4)) {
        let text = print_poly(&p);
        let back = parse_poly(&text).expect("printed polynomial parses");
        prop_assert!(p.max_coeff_diff(&back) < 1e-9, "round trip through {text:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn star_is_an_involution(index in 0usize..23, p in poly(3, 3)) {
        let (_, rt) = case_table(index);
        let starred = qalgebra::star(&p, &rt).expect("star");
        let twice = qalgebra::star(&starred, &rt).expect("star star");
        // normal-form coefficients grow with the case parameters, so the
        // absolute tolerance is looser than for the table checks
        prop_assert!(twice.max_coeff_diff(&p) < 1e-7);
    }

    #[test]
    fn product_is_associative(
        index in 0usize..23,
        p in poly(2, 2),
        q in poly(1, 2),
        r in poly(1, 2),
    ) {
        let (_, rt) = case_table(index);
        let pq = qalgebra::multiply(&p, &q, &rt).expect("pq");
        let qr = qalgebra::multiply(&q, &r, &rt).expect("qr");
        let lhs = qalgebra::multiply(&pq, &r, &rt).expect("(pq)r");
        let rhs = qalgebra::multiply(&p, &qr, &rt).expect("p(qr)");
        prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-8);
    }
}
