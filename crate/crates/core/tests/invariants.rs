use freehilbert::algebra::{random_element_with, rng_from_seed, CoeffLaw, Profile};
use freehilbert::constants::bound_c;
use freehilbert::io::{element_from_json, element_to_json};
use freehilbert::lp::{moment_norm, norm_spectral};
use freehilbert::multipliers::{hilbert_free, hilbert_free_op, paraproduct, random_gen_symbol, ParaFlag, SymbolLaw};
use freehilbert::paths::{build_partition, PartitionKind};
use freehilbert::verify::{fuzz, Arith, FuzzProfile, IdentityId};
use freehilbert::words::{enumerate_ball, invert, prefix_leq, reduce_concat, Word};
use freehilbert::{Element, Rational};
use num_complex::Complex;
use proptest::prelude::*;

type Q = Rational;
type X = Element<Complex<Q>>;

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(prop_oneof![-3i32..=-1, 1i32..=3], 0..8).prop_map(|v| Word::reduce(v).unwrap())
}

fn profile() -> Profile {
    Profile { max_len: 4, max_terms: 5, coeff_law: CoeffLaw::RationalGrid, num_gens: 3 }
}

fn exact(seed: u64) -> X {
    random_element_with::<Q, _>(&mut rng_from_seed(seed), &profile())
}

/// Free reduction by a stack, independent of the library's concatenation.
fn stack_reduce(letters: impl IntoIterator<Item = i32>) -> Vec<i32> {
    let mut st: Vec<i32> = Vec::new();
    for l in letters {
        if st.last() == Some(&-l) {
            st.pop();
        } else {
            st.push(l);
        }
    }
    st
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concat_matches_stack_reduction(u in word(), v in word()) {
        let want = stack_reduce(u.letters().iter().chain(v.letters()).copied());
        prop_assert_eq!(reduce_concat(&u, &v).to_vec(), want);
    }

    #[test]
    fn inverse_and_associativity(u in word(), v in word(), w in word()) {
        prop_assert!(reduce_concat(&u, &invert(&u)).is_e());
        prop_assert_eq!(reduce_concat(&reduce_concat(&u, &v), &w), reduce_concat(&u, &reduce_concat(&v, &w)));
    }

    #[test]
    fn prefix_order_is_compatible_with_length(u in word(), v in word()) {
        if prefix_leq(&u, &v) {
            prop_assert!(u.len() <= v.len());
            prop_assert_eq!(&v.letters()[..u.len()], u.letters());
        }
    }

    #[test]
    fn product_is_associative_and_adjoint_reverses(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (exact(a), exact(b), exact(c));
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().adjoint(), y.adjoint().mul(&x.adjoint()).unwrap());
        prop_assert_eq!(x.adjoint().mul(&x).unwrap().scalar_trace().re, x.norm2_sqr());
    }

    #[test]
    fn paraproducts_split_the_product(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (exact(a), exact(b));
        let xy = x.mul(&y).unwrap();
        let sharp = paraproduct(&x, &y, ParaFlag::Sharp).unwrap();
        let dagger = paraproduct(&x, &y, ParaFlag::Dagger).unwrap();
        let rest = xy.sub(&sharp).unwrap().sub(&dagger).unwrap();
        prop_assert_eq!(rest, xy.expectation());
    }

    #[test]
    fn unimodular_hilbert_is_unitary(a in any::<u64>()) {
        let mut rng = rng_from_seed(a);
        let x = random_element_with::<Q, _>(&mut rng, &profile());
        let sym = random_gen_symbol::<Q, _>(&mut rng, 3, SymbolLaw::Unimodular);
        let hx = hilbert_free(&x, &sym);
        prop_assert_eq!(hx.norm2_sqr(), x.norm2_sqr());
        prop_assert_eq!(hilbert_free(&hx, &sym.conj()), x.clone());
        prop_assert_eq!(hilbert_free(&x.adjoint(), &sym), hilbert_free_op(&x, &sym).adjoint());
    }

    #[test]
    fn json_round_trip(a in any::<u64>()) {
        let x = exact(a);
        prop_assert_eq!(element_from_json::<Complex<Q>>(&element_to_json(&x)).unwrap(), x);
    }

    #[test]
    fn short_fuzz_passes_for_every_identity(seed in any::<u64>()) {
        for id in IdentityId::all() {
            let prof = FuzzProfile { max_len: 3, max_terms: 3, ..FuzzProfile::default() };
            let rep = fuzz(id, Arith::Exact, &prof, 2, seed).unwrap();
            prop_assert!(rep.all_pass(), "{} failed: {:?}", id, rep.witness);
        }
    }

    #[test]
    fn partitions_cover_the_ball_once(radius in 1usize..5, seed in any::<u64>(), powers in any::<bool>()) {
        let kind = if powers { PartitionKind::Powers } else { PartitionKind::Greedy };
        let part = build_partition(kind, 2, radius, seed).unwrap();
        let mut covered: Vec<Word> = part.paths.iter().flat_map(|p| p.words.clone()).collect();
        covered.sort();
        let mut ball: Vec<Word> = enumerate_ball(2, radius).unwrap().into_iter().filter(|w| !w.is_e()).collect();
        ball.sort();
        prop_assert_eq!(covered, ball);
        for p in &part.paths {
            for pair in p.words.windows(2) {
                prop_assert!(prefix_leq(&pair[0], &pair[1]) && pair[1].len() == pair[0].len() + 1);
            }
        }
    }

    #[test]
    fn bound_c_is_symmetric_and_increasing(p in 1.05f64..40.0) {
        let q = p / (p - 1.0);
        prop_assert!((bound_c(p).unwrap() - bound_c(q).unwrap()).abs() < 1e-9 * bound_c(p).unwrap());
        prop_assert!(bound_c(p.max(q) * 1.1).unwrap() >= bound_c(p.max(q)).unwrap());
        prop_assert!(bound_c(p).unwrap() >= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectral_norm_matches_even_moments(a in any::<u64>()) {
        let prof = Profile { max_len: 2, max_terms: 4, coeff_law: CoeffLaw::Gaussian, num_gens: 2 };
        let x = random_element_with::<f64, _>(&mut rng_from_seed(a), &prof);
        let r = x.max_len().max(1);
        for p in [2usize, 4, 6] {
            let m = moment_norm(&x, p).unwrap();
            let s = norm_spectral(&x, p as f64, r * p / 2).unwrap().value;
            prop_assert!((m - s).abs() <= 1e-8 * m.max(1e-300), "p={} moment {} spectral {}", p, m, s);
        }
    }
}
