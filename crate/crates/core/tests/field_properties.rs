use std::sync::Arc;

use dynrefl::exactfield::{
    parse_rational, q_frac, q_int, rf_equal, CheckMode, Polynomial, RationalFunction, VariableRegistry, Q,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

// A term is c * prod (form)^e with forms over (q1, q2, mu).
#[derive(Debug, Clone)]
struct Term {
    num: i64,
    den: i64,
    forms: Vec<([i64; 3], i64, i32)>,
}

fn form_strategy() -> impl Strategy<Value = ([i64; 3], i64, i32)> {
    (prop::array::uniform3(-2i64..=2), -2i64..=2, prop_oneof![Just(-2), Just(-1), Just(1), Just(2)])
        .prop_filter("nonconstant form", |(c, _, _)| c.iter().any(|&x| x != 0))
}

fn term_strategy() -> impl Strategy<Value = Term> {
    (-5i64..=5, 1i64..=4, prop::collection::vec(form_strategy(), 0..3)).prop_map(|(num, den, forms)| Term { num, den, forms })
}

fn recipe_strategy() -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(term_strategy(), 1..4)
}

fn reg() -> Arc<VariableRegistry> {
    VariableRegistry::standard(2)
}

fn form_poly(c: &[i64; 3], k: i64) -> Polynomial {
    let mut p = Polynomial::constant(3, q_int(k));
    for (i, &x) in c.iter().enumerate() {
        p = p.add(&Polynomial::var(3, i).scale(&q_int(x)));
    }
    p
}

fn build(r: &Arc<VariableRegistry>, recipe: &[Term]) -> RationalFunction {
    let mut acc = RationalFunction::zero(r);
    for t in recipe {
        let mut x = RationalFunction::constant(r, q_frac(t.num, t.den));
        for (c, k, e) in &t.forms {
            let f = RationalFunction::from_polynomial(r, &form_poly(c, *k));
            x = x.mul(&f.pow(*e).unwrap());
        }
        acc = acc.add(&x);
    }
    acc
}

// Independent of the canonical representation: plain rational arithmetic.
fn direct(recipe: &[Term], pt: &[Q; 3]) -> Option<Q> {
    let mut acc = Q::zero();
    for t in recipe {
        let mut x = q_frac(t.num, t.den);
        for (c, k, e) in &t.forms {
            let v = q_int(*k) + &pt[0] * q_int(c[0]) + &pt[1] * q_int(c[1]) + &pt[2] * q_int(c[2]);
            if v.is_zero() {
                return None;
            }
            let v = if *e < 0 { v.recip() } else { v };
            for _ in 0..e.unsigned_abs() {
                x *= &v;
            }
        }
        acc += x;
    }
    Some(acc)
}

fn point_strategy() -> impl Strategy<Value = [Q; 3]> {
    prop::array::uniform3((-40i64..=40, 1i64..=7)).prop_map(|a| a.map(|(n, d)| q_frac(n, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn evaluation_matches_direct_arithmetic(recipe in recipe_strategy(), pt in point_strategy()) {
        let r = reg();
        let f = build(&r, &recipe);
        if let Some(expected) = direct(&recipe, &pt) {
            prop_assert_eq!(f.eval(&pt).unwrap(), expected);
        }
    }

    #[test]
    fn text_roundtrip_is_structural(recipe in recipe_strategy()) {
        let r = reg();
        let f = build(&r, &recipe);
        let g = parse_rational(&r, &f.to_text()).unwrap();
        prop_assert!(g.same_form(&f), "{} vs {}", f, g);
        prop_assert_eq!(g.to_text(), f.to_text());
    }

    #[test]
    fn canonical_form_is_idempotent(recipe in recipe_strategy()) {
        let r = reg();
        let f = build(&r, &recipe);
        prop_assert!(f.mul(&RationalFunction::one(&r)).same_form(&f));
        prop_assert!(f.add(&RationalFunction::zero(&r)).same_form(&f));
        prop_assert!(f.neg().neg().same_form(&f));
    }

    #[test]
    fn shift_is_a_group_action(recipe in recipe_strategy(), v in prop::array::uniform2(-3i64..=3), w in prop::array::uniform2(-3i64..=3)) {
        let r = reg();
        let f = build(&r, &recipe);
        let vw = [v[0] + w[0], v[1] + w[1]];
        prop_assert!(f.shift(&v).shift(&w).same_form(&f.shift(&vw)));
        prop_assert!(f.shift(&v).shift(&[-v[0], -v[1]]).same_form(&f));
    }

    #[test]
    fn eval_commutes_with_arithmetic(a in recipe_strategy(), b in recipe_strategy(), pt in point_strategy()) {
        let r = reg();
        let (f, g) = (build(&r, &a), build(&r, &b));
        if let (Ok(x), Ok(y)) = (f.eval(&pt), g.eval(&pt)) {
            prop_assert_eq!(f.add(&g).eval(&pt).unwrap(), &x + &y);
            prop_assert_eq!(f.sub(&g).eval(&pt).unwrap(), &x - &y);
            prop_assert_eq!(f.mul(&g).eval(&pt).unwrap(), &x * &y);
            if !y.is_zero() {
                prop_assert_eq!(f.div(&g).unwrap().eval(&pt).unwrap(), &x / &y);
            }
        }
    }

    #[test]
    fn field_axioms(a in recipe_strategy(), b in recipe_strategy(), c in recipe_strategy()) {
        let r = reg();
        let (f, g, h) = (build(&r, &a), build(&r, &b), build(&r, &c));
        prop_assert_eq!(f.mul(&g), g.mul(&f));
        prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
        prop_assert!(f.add(&g).sub(&g).same_form(&f));
        if !g.is_zero() {
            prop_assert!(f.div(&g).unwrap().mul(&g).same_form(&f));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // Exact and random equality agree on true and false pairs alike.
    #[test]
    fn exact_and_random_equality_agree(a in recipe_strategy(), b in recipe_strategy(), flip in any::<bool>(), seed in any::<u64>()) {
        let r = reg();
        let f = build(&r, &a);
        let g = build(&r, &b);
        let other = if flip {
            f.add(&g).sub(&g)
        } else {
            f.add(&RationalFunction::constant(&r, Q::one()).mul(&g).add(&RationalFunction::one(&r)))
        };
        let exact = rf_equal(&f, &other, CheckMode::Exact).unwrap();
        let random = rf_equal(&f, &other, CheckMode::random(seed)).unwrap();
        prop_assert_eq!(exact.equal, random.equal);
    }
}

#[test]
fn distinct_degree_five_polynomials() {
    let r = reg();
    let q1 = RationalFunction::q(&r, 0);
    let q2 = RationalFunction::q(&r, 1);
    let a = q1.pow(5).unwrap().add(&q2.pow(3).unwrap());
    let b = q1.pow(5).unwrap().add(&q2.pow(2).unwrap().mul(&q1));
    let c = rf_equal(&a, &b, CheckMode::random(5)).unwrap();
    assert!(!c.equal);
    assert!(!rf_equal(&a, &b, CheckMode::Exact).unwrap().equal);
}
