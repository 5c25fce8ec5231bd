use proptest::prelude::*;
use tailcert::discrete::{soundness_suite, tight_certificate, DiscreteLaw};
use tailcert::rate::RateFunction;
use tailcert::{add, multiply, power_transform};

#[test]
fn two_hundred_instances_twelve_atoms() {
    for seed in [1u64, 2, 3] {
        let r = soundness_suite(200, 12, seed).unwrap();
        assert!(r.violations.is_empty(), "seed {seed}: {:#?}", &r.violations[..r.violations.len().min(3)]);
        assert!(r.checks > 10_000);
    }
}

fn law() -> impl Strategy<Value = DiscreteLaw> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..12).prop_map(|atoms| {
        let s: f64 = atoms.iter().map(|a| a.1).sum();
        DiscreteLaw::new(atoms.into_iter().map(|(v, p)| (v, p / s)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn add_and_multiply_dominate(x in law(), w in law(), c in 0.1f64..3.0, r in 0.5f64..3.0, y in 1.0f64..4.0) {
        let f = RateFunction::power(c, 2.0);
        let a = tight_certificate(&x, y, r, f.clone(), 1.0).unwrap();
        let b = tight_certificate(&w, 1.0, r, RateFunction::linear(c), 1.0).unwrap();
        let sum = add(&a, &b).unwrap();
        let prod = multiply(&a, &b).unwrap();
        let xs = x.add_independent(&w);
        let xp = x.mul_independent(&w);
        for k in 0..=30 {
            let t = 1.1f64.powi(k);
            prop_assert!(xs.abs_tail(t * (y + 1.0)) <= sum.eval_bound(1, t).unwrap() * (1.0 + 1e-9));
            prop_assert!(xp.abs_tail(t * y) <= prod.eval_bound(1, t).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn power_transform_is_exact_reparametrization(x in law(), alpha in 0.2f64..4.0, t in 1.0f64..50.0) {
        let a = tight_certificate(&x, 1.5, 2.0, RateFunction::Log, std::f64::consts::E).unwrap();
        let p = power_transform(&a, alpha).unwrap();
        let tt = t.max(p.c2() * (1.0 + 1e-9));
        let direct = a.eval_bound(1, tt.powf(1.0 / alpha)).unwrap();
        prop_assert!((p.eval_bound(1, tt).unwrap() - direct).abs() <= 1e-12 * direct.max(1e-300));
    }
}
