mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use qgw_core::gw::GwKey;
use qgw_core::lang::{
    format_key, parse_class_expr, parse_gw_key, parse_invariant_expr, parse_qk_key, Atom, ClassExpr, Coef,
    InsertionExpr, InvariantExpr, Sign, Span, Term,
};
use qgw_core::qk::InvariantKey;
use qgw_core::Error;

#[test]
fn canonical_k_keys_round_trip() {
    let mut count = 0;
    for r in 1..=3 {
        for d in 0..=2 {
            for n in 1..=4 {
                for ins in common::insertion_lists(n, 3, r) {
                    let key = InvariantKey::new(r, d, ins).unwrap();
                    if !key.is_stable() {
                        continue;
                    }
                    let text = format_key(&key);
                    assert_eq!(parse_qk_key(&text, r).unwrap(), key, "{text}");
                    count += 1;
                }
            }
        }
    }
    assert!(count >= 1000, "only {count} keys");
}

#[test]
fn canonical_h_keys_round_trip() {
    let keys = common::gw_keys(3, 4, 6);
    assert!(keys.len() >= 200);
    for key in keys {
        let text = format_key(&key);
        assert_eq!(parse_gw_key(&text, 2).unwrap(), key, "{text}");
    }
    // the point class prints as H^2 and the unit as 1
    assert_eq!(format_key(&GwKey::plane_curves(2)), "(H^2, H^2, H^2, H^2, H^2) @ d=2");
}

#[test]
fn non_basis_text_is_not_a_key() {
    assert!(parse_qk_key("(2*e1, e1) @ d=1", 1).is_err());
    assert!(parse_qk_key("(H, e1) @ d=1", 1).is_err());
    assert!(parse_gw_key("(H^3, H^2) @ d=1", 2).is_err());
}

fn atom() -> impl Strategy<Value = Atom> {
    prop_oneof![(0u32..12).prop_map(Atom::E), Just(Atom::H), (0u32..12).prop_map(Atom::HPow), Just(Atom::One)]
}

fn coef() -> impl Strategy<Value = Option<Coef>> {
    prop::option::of(
        (0u64..1_000_000, prop::option::of(1u64..1000))
            .prop_map(|(n, d)| Coef { num: BigInt::from(n), den: d.map(BigInt::from) }),
    )
}

fn class() -> impl Strategy<Value = ClassExpr> {
    prop::collection::vec((any::<bool>(), coef(), atom()), 1..5).prop_map(|terms| ClassExpr {
        terms: terms
            .into_iter()
            .map(|(neg, coef, atom)| Term {
                sign: if neg { Sign::Minus } else { Sign::Plus },
                coef,
                atom,
                span: Span::default(),
                atom_span: Span::default(),
            })
            .collect(),
        span: Span::default(),
    })
}

fn invariant() -> impl Strategy<Value = InvariantExpr> {
    (prop::collection::vec((prop::option::of(0u32..20), class()), 1..6), 0u32..50).prop_map(|(ins, degree)| {
        InvariantExpr {
            insertions: ins
                .into_iter()
                .map(|(psi, class)| InsertionExpr { psi, class, span: Span::default() })
                .collect(),
            degree,
            span: Span::default(),
        }
    })
}

/// Re-spaces printed text at token boundaries.
fn respace(text: &str, spaces: &[u8]) -> String {
    let mut out = String::new();
    for (i, ch) in text.chars().enumerate() {
        if "(),@=*+-/^".contains(ch) {
            out.push_str(&" ".repeat(spaces[i % spaces.len()] as usize));
        }
        out.push(ch);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_invariants_reparse(expr in invariant()) {
        let text = expr.to_string();
        prop_assert_eq!(parse_invariant_expr(&text).unwrap(), expr);
    }

    #[test]
    fn whitespace_is_insignificant(expr in invariant(), spaces in prop::collection::vec(0u8..3, 1..8)) {
        let text = expr.to_string();
        let spaced = respace(&text, &spaces);
        prop_assert_eq!(parse_invariant_expr(&spaced).unwrap(), expr);
    }

    #[test]
    fn classes_reparse(c in class()) {
        prop_assert_eq!(parse_class_expr(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,40}") {
        match parse_invariant_expr(&text) {
            Ok(_) => {}
            Err(Error::Parse { pos, .. }) => prop_assert!(pos <= text.len()),
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }

    #[test]
    fn near_miss_text_never_panics(text in "[()@d=eLH^*+/ ,0-9-]{0,30}") {
        match parse_invariant_expr(&text) {
            Ok(expr) => prop_assert_eq!(parse_invariant_expr(&expr.to_string()).unwrap(), expr),
            Err(Error::Parse { pos, .. }) => prop_assert!(pos <= text.len()),
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }
}
