//! Property tests: printed forms of formulas, structures and teams parse
//! back to the same value.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use teamsem::files::{parse_structure, parse_team, print_structure, print_team};
use teamsem::model::{Structure, Team};
use teamsem::parser::parse;
use teamsem::verify::{generate_formula, CorpusConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn formula_display_round_trips(seed in any::<u64>(), depth in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = CorpusConfig { depth, ..CorpusConfig::default() };
        let f = generate_formula(&mut rng, &cfg);
        let printed = f.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &f, "printed form: {}", printed);
    }

    #[test]
    fn structure_files_round_trip(
        n in 1usize..5,
        rel_bits in any::<u32>(),
        unary_bits in any::<u8>(),
        with_const in any::<bool>(),
        const_pick in 0usize..4,
    ) {
        let tuples: std::collections::BTreeSet<Vec<usize>> = (0..n * n)
            .filter(|i| rel_bits >> i & 1 == 1)
            .map(|i| vec![i / n, i % n])
            .collect();
        let unary: std::collections::BTreeSet<Vec<usize>> =
            (0..n).filter(|i| unary_bits >> i & 1 == 1).map(|i| vec![i]).collect();
        let mut consts = std::collections::BTreeMap::new();
        if with_const {
            consts.insert("c0".to_string(), const_pick % n);
        }
        let m = Structure::with_size(
            n,
            [("R".to_string(), (2, tuples)), ("P".to_string(), (1, unary))].into(),
            consts,
        ).unwrap();
        let back = parse_structure(&print_structure(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn team_files_round_trip(n in 1usize..4, row_bits in any::<u16>(), two_vars in any::<bool>()) {
        let m = Structure::with_size(n, Default::default(), Default::default()).unwrap();
        let vars: Vec<String> = if two_vars {
            vec!["x".into(), "y".into()]
        } else {
            vec!["x".into()]
        };
        let space = n.pow(vars.len() as u32);
        let rows: Vec<Vec<usize>> = (0..space)
            .filter(|i| row_bits >> i & 1 == 1)
            .map(|i| if two_vars { vec![i / n, i % n] } else { vec![i] })
            .collect();
        let x = Team::from_rows(vars, rows).unwrap();
        let back = parse_team(&print_team(&x, &m), &m).unwrap();
        prop_assert_eq!(back, x);
    }
}
