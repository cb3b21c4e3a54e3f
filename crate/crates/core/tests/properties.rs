use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relent_core::entropy::{mutual_information, relative_entropy, Extended, SUPPORT_TOL};
use relent_core::free_sets::{lmo, OracleConfig};
use relent_core::random::{random_density, random_density_rank, random_hermitian, random_unitary};
use relent_core::sequence::{gen_dominated, DominatedOptions};
use relent_core::{Density, FreeSet, Hermitian, Positive, SystemLayout};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn layout(pick: u8) -> SystemLayout {
    match pick % 3 {
        0 => SystemLayout::bipartite(2, 2).unwrap(),
        1 => SystemLayout::bipartite(2, 3).unwrap(),
        _ => SystemLayout::new(vec![2, 2, 2]).unwrap(),
    }
}

fn d(rho: &Density, sigma: &Density) -> Extended<f64> {
    relative_entropy(rho.positive(), sigma.positive(), SUPPORT_TOL)
}

fn conjugate(rho: &Density, u: &nalgebra::DMatrix<nalgebra::Complex<f64>>) -> Density {
    let m = u * rho.matrix() * u.adjoint();
    let h = Hermitian::new((&m + m.adjoint()) * nalgebra::Complex::new(0.5, 0.0)).unwrap();
    Density::normalized(Positive::new(h).unwrap(), rho.layout().clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn divergence_is_nonnegative_and_vanishes_on_the_diagonal(seed in any::<u64>(), pick in any::<u8>()) {
        let mut r = rng(seed);
        let l = layout(pick);
        let rho: Density = random_density(&l, &mut r);
        let sigma: Density = random_density_rank(&l, 1 + (seed % 4) as usize, &mut r);
        prop_assert!(d(&rho, &sigma) >= Extended::Finite(-1e-12));
        prop_assert!(d(&rho, &rho).to_f64().abs() < 1e-12);
    }

    #[test]
    fn partial_trace_does_not_increase_divergence(seed in any::<u64>(), pick in any::<u8>()) {
        let mut r = rng(seed);
        let l = layout(pick);
        let rho: Density = random_density(&l, &mut r);
        let sigma: Density = random_density(&l, &mut r);
        let full = d(&rho, &sigma);
        for k in 0..l.parties() {
            let part = d(&rho.marginal(&[k]).unwrap(), &sigma.marginal(&[k]).unwrap());
            prop_assert!(part <= full + Extended::Finite(1e-10));
        }
    }

    #[test]
    fn divergence_is_unitarily_invariant(seed in any::<u64>(), pick in any::<u8>()) {
        let mut r = rng(seed);
        let l = layout(pick);
        let rho: Density = random_density(&l, &mut r);
        let sigma: Density = random_density(&l, &mut r);
        let u = random_unitary::<f64, _>(l.total(), &mut r);
        let rotated = d(&conjugate(&rho, &u), &conjugate(&sigma, &u));
        prop_assert!((rotated.to_f64() - d(&rho, &sigma).to_f64()).abs() < 1e-9);
    }

    #[test]
    fn divergence_is_jointly_convex(seed in any::<u64>(), p in 0.0f64..1.0) {
        let mut r = rng(seed);
        let l = layout(0);
        let (r1, r2): (Density, Density) = (random_density(&l, &mut r), random_density(&l, &mut r));
        let (s1, s2): (Density, Density) = (random_density(&l, &mut r), random_density(&l, &mut r));
        let mixed = d(&r1.mix(&r2, p).unwrap(), &s1.mix(&s2, p).unwrap()).to_f64();
        let bound = p * d(&r1, &s1).to_f64() + (1.0 - p) * d(&r2, &s2).to_f64();
        prop_assert!(mixed <= bound + 1e-10);
    }

    #[test]
    fn mutual_information_routes_agree(seed in any::<u64>(), pick in any::<u8>()) {
        let mut r = rng(seed);
        let rho: Density = random_density(&layout(pick), &mut r);
        let mi = mutual_information(&rho).unwrap();
        prop_assert!(mi.discrepancy < 1e-9);
        prop_assert!(mi.via_entropies >= -1e-12);
    }

    #[test]
    fn larger_sets_have_smaller_linear_minima(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = layout(0);
        let g: Hermitian = random_hermitian(4, &mut r);
        let cfg = OracleConfig { restarts: 8, ..OracleConfig::default() };
        let sep = lmo(&g, &FreeSet::separable(l.clone()), &cfg).unwrap();
        let ppt = lmo(&g, &FreeSet::ppt(l, vec![1]).unwrap(), &cfg).unwrap();
        // every state lies above λ_min, and PPT ⊇ separable
        prop_assert!(sep.value >= g.eigh().min() - 1e-10);
        prop_assert!(ppt.lower_bound <= sep.value + 1e-7);
    }

    #[test]
    fn dominated_sequences_meet_their_premise(seed in any::<u64>(), c in 0.1f64..1.0) {
        let mut r = rng(seed);
        let l = layout(0);
        let sigma: Density = random_density(&l, &mut r);
        let seq = gen_dominated(&sigma, c, 6, seed, DominatedOptions::default()).unwrap();
        for rho in seq.prefix() {
            let slack = sigma.hermitian() - &rho.hermitian().scaled(c);
            prop_assert!(slack.eigh().min() >= -1e-12);
        }
        let dist = seq.trace_distances();
        prop_assert!(dist[seq.burn_in()..].windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
}
