//! Model quantities checked against independent computations.

use dynrefl::checks::classical_part;
use dynrefl::exactfield::{q_frac, q_int, RationalFunction, Q};
use dynrefl::models::{self, Eigenfunction, ExponentMode, FRatio, GammaKind, Parity};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Gamma by upward recurrence to x >= 30 and the Stirling series.
fn gamma_oracle(x: f64) -> f64 {
    let mut x = x;
    let mut scale = 1.0;
    while x < 30.0 {
        scale /= x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    scale * ((x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series).exp()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn gamma_matches_known_values() {
    assert!(rel(models::gamma(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-13);
    let mut fact = 1.0;
    for k in 1..15 {
        assert!(rel(models::gamma(k as f64).unwrap(), fact) < 1e-12, "Gamma({k})");
        fact *= k as f64;
    }
    // Reflection region.
    assert!(rel(models::gamma(-0.5).unwrap(), -2.0 * std::f64::consts::PI.sqrt()) < 1e-12);
    assert!(models::gamma(0.0).is_err());
    assert!(models::gamma(-3.0).is_err());
}

#[test]
fn gamma_recurrence_and_stirling_agree() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(0.1..12.0);
        let g = models::gamma(x).unwrap();
        assert!(rel(models::gamma(x + 1.0).unwrap(), x * g) < 1e-12, "recurrence at {x}");
        assert!(rel(g, gamma_oracle(x)) < 1e-12, "stirling at {x}");
    }
}

#[test]
fn half_step_ratio_telescopes() {
    // Gamma(x+1/2)/Gamma(x) times Gamma(x+1)/Gamma(x+1/2) is x.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let x: f64 = rng.gen_range(-3.9..6.0);
        if (x * 2.0 - (x * 2.0).round()).abs() < 1e-3 {
            continue;
        }
        let r = models::gamma_ratio(x).unwrap() * models::gamma_ratio(x + 0.5).unwrap();
        assert!(rel(r, x) < 1e-11, "at {x}: {r}");
    }
}

fn oracle_eigen(e: &Eigenfunction, q: f64) -> f64 {
    let x = (q + e.mu) / (4.0 * e.mu);
    let r = gamma_oracle(x + 0.5) / gamma_oracle(x);
    let c = e.exponent.coefficient(e.mu);
    let arg = e.k as f64 * std::f64::consts::PI * q / e.mu;
    let t = if e.parity == Parity::Sin { arg.sin() } else { arg.cos() };
    r * (-c * q * (e.m1 / e.m2).ln()).exp() * t
}

#[test]
fn eigenfunction_values_match_oracle() {
    for (m1, m2, exponent) in [(1.0, 1.0, ExponentMode::Derived), (2.0, 1.0, ExponentMode::Printed), (0.7, 1.9, ExponentMode::Derived)] {
        let e = Eigenfunction { k: 2, parity: Parity::Sin, m1, m2, mu: 0.8, exponent };
        for q in models::sample_points(e.mu, 30, 5) {
            let a = e.value(q).unwrap();
            let b = oracle_eigen(&e, q);
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-3), "q = {q}: {a} vs {b}");
        }
    }
}

#[test]
fn printed_exponent_misses_by_mass_ratio() {
    // The shifted terms differ by the factor (m1/m2)^(2 - 4 c mu); with c = 1/(4 mu) the
    // relative residual is 1 - min/max of the masses at every point.
    for (m1, m2) in [(2.0, 1.0), (1.0, 3.0), (1.5, 1.2)] {
        let e = Eigenfunction { k: 1, parity: Parity::Cos, m1, m2, mu: 1.0, exponent: ExponentMode::Printed };
        let expect = 1.0 - f64::min(m1, m2) / f64::max(m1, m2);
        for q in models::sample_points(1.0, 20, 9) {
            let r = models::apply_relative_hamiltonian(&e, q).unwrap();
            assert!((r.relative() - expect).abs() < 1e-9, "{m1},{m2} at {q}: {}", r.relative());
        }
    }
}

fn point(n: usize) -> Vec<Q> {
    let qs = [q_frac(3, 7), q_frac(-5, 3), q_frac(11, 5), q_frac(1, 4), q_frac(-13, 6)];
    let mut p: Vec<Q> = qs[..n].to_vec();
    p.push(q_frac(2, 9));
    for k in 0..n {
        p.push(q_int(k as i64 + 1));
    }
    p
}

/// `mu/(q_i - q_j)` on `E_ij (x) E_ji` (or `E_ji (x) E_ji` for b) minus the same on `E_ii (x) E_jj`.
fn classical_oracle(n: usize, p: &[Q], letter: char) -> Vec<Vec<Q>> {
    let mut m = vec![vec![Q::zero(); n * n]; n * n];
    let mu = &p[n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let x = mu / (&p[i] - &p[j]);
            let (row, col) = match letter {
                'a' => ((i, j), (j, i)),
                _ => ((j, j), (i, i)),
            };
            m[row.0 * n + row.1][col.0 * n + col.1] += &x;
            m[i * n + j][i * n + j] -= &x;
        }
    }
    m
}

#[test]
fn classical_parts_match_first_order_expansion() {
    for n in [2, 3] {
        let model = models::rational_model(n).unwrap();
        let p = point(n);
        for (letter, m) in [('a', model.printed_a()), ('b', model.printed_b())] {
            let r = classical_part(m).unwrap();
            let want = classical_oracle(n, &p, letter);
            for (row, wrow) in want.iter().enumerate() {
                for (col, w) in wrow.iter().enumerate() {
                    let got = r.get(&[row / n, row % n], &[col / n, col % n]).unwrap().eval(&p).unwrap();
                    assert_eq!(&got, w, "{letter} n={n} entry {row},{col}");
                }
            }
        }
    }
}

#[test]
fn reduction_commutes_with_action_on_monomials() {
    let m = models::rational_model(2).unwrap();
    let reg = m.registry();
    let k = models::gamma_solution(reg, GammaKind::RankOne, &m.masses(), &FRatio::One).unwrap();
    let kk = models::gamma_solution(reg, GammaKind::Diagonal, &[], &FRatio::One).unwrap();
    let h = models::hamiltonian_from_pair(&k, &kk).unwrap();
    let reduced = models::reduce_n2(&h).unwrap();
    let dst = reduced.registry().clone();
    let (q1, q2) = (RationalFunction::q(reg, 0), RationalFunction::q(reg, 1));
    for a in 0..3 {
        for b in 0..3 {
            let mut g = RationalFunction::one(reg);
            for _ in 0..a {
                g = g.mul(&q1);
            }
            for _ in 0..b {
                g = g.mul(&q2);
            }
            let lhs = models::to_relative(&h.apply(&g), &dst).unwrap();
            let rhs = reduced.apply(&models::to_relative(&g, &dst).unwrap());
            assert_eq!(lhs, rhs, "q1^{a} q2^{b}");
        }
    }
}

#[test]
fn hamiltonian_coefficients_at_rational_point() {
    // m_l^2 / prod_{j != l} (q_l - q_j + mu) on the shift of leg l, evaluated by hand.
    let m = models::rational_model(3).unwrap();
    let reg = m.registry();
    let k = models::gamma_solution(reg, GammaKind::RankOne, &m.masses(), &FRatio::One).unwrap();
    let kk = models::gamma_solution(reg, GammaKind::Diagonal, &[], &FRatio::One).unwrap();
    let h = models::hamiltonian_from_pair(&k, &kk).unwrap();
    let p = point(3);
    let mu = &p[3];
    for l in 0..3 {
        let mut v = vec![0i64; 3];
        v[l] = 2;
        let mut want = &p[4 + l] * &p[4 + l];
        for j in (0..3).filter(|&j| j != l) {
            want /= &p[l] - &p[j] + mu;
        }
        assert_eq!(h.coefficient(&v).eval(&p).unwrap(), want, "leg {l}");
    }
    assert_eq!(h.len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derived_exponent_annihilates_for_any_masses(
        m1 in 0.3f64..4.0,
        m2 in 0.3f64..4.0,
        mu in 0.2f64..3.0,
        k in 1u32..4,
        sin in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let e = Eigenfunction { k, parity: if sin { Parity::Sin } else { Parity::Cos }, m1, m2, mu, exponent: ExponentMode::Derived };
        for q in models::sample_points(mu, 8, seed) {
            let r = models::apply_relative_hamiltonian(&e, q).unwrap();
            prop_assert!(r.relative() <= 1e-9, "q = {q}: {}", r.relative());
        }
    }

    #[test]
    fn sample_points_avoid_poles(mu in 0.01f64..10.0, seed in any::<u64>()) {
        for q in models::sample_points(mu, 16, seed) {
            let u = q / mu;
            let frac = u - u.floor();
            prop_assert!((-2.0..3.0).contains(&u));
            prop_assert!((0.05 - 1e-12..=0.95 + 1e-12).contains(&frac));
            prop_assert!((frac - 0.5).abs() >= 0.05 - 1e-12);
        }
    }
}
