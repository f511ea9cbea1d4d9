use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use topocode::par::Exec;
use topocode::string_algebra::{DigitString, Ring};
use topocode::topcode::{pronbs_solve, string_from_topcode, ParamTopcode, PermIndex, PronbsBounds, TopcodeMatrix};

fn rows(max_q: usize, max: i64) -> impl Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>)> {
    (1..=max_q).prop_flat_map(move |q| {
        let r = || prop::collection::vec(0..=max, q);
        (r(), r(), r())
    })
}

fn add(a: &TopcodeMatrix, b: &TopcodeMatrix) -> [Vec<i64>; 3] {
    let (a, b) = (a.numeric_rows().unwrap(), b.numeric_rows().unwrap());
    std::array::from_fn(|r| a[r].iter().zip(&b[r]).map(|(x, y)| x + y).collect())
}

proptest! {
    #[test]
    fn triples_round_trip((x, e, y) in rows(8, 99)) {
        let t = TopcodeMatrix::numeric(&x, &e, &y).unwrap();
        let triples = t.triples().unwrap();
        prop_assert_eq!(triples.len(), x.len());
        let (tx, te, ty): (Vec<i64>, Vec<i64>, Vec<i64>) =
            triples.iter().fold((vec![], vec![], vec![]), |(mut a, mut b, mut c), &(p, q, r)| {
                a.push(p);
                b.push(q);
                c.push(r);
                (a, b, c)
            });
        prop_assert_eq!(TopcodeMatrix::numeric(&tx, &te, &ty).unwrap(), t);
    }

    #[test]
    fn perm_rank_round_trip(len in 1usize..12, r in any::<u64>()) {
        let total: BigUint = (1..=len as u64).map(BigUint::from).product();
        let rank = BigUint::from(r) % &total;
        let p = PermIndex::from_rank(len, &rank).unwrap();
        prop_assert_eq!(p.rank(), rank);
        prop_assert!(PermIndex::from_rank(len, &total).is_err());
    }

    #[test]
    fn evaluation_is_linear_in_k((x, e, y) in rows(6, 9), k1 in 0i64..20, k2 in 0i64..20, d in 0i64..5) {
        let p = ParamTopcode::new(&TopcodeMatrix::numeric(&x, &e, &y).unwrap()).unwrap();
        let lhs = p.evaluate(k1 + k2, d).unwrap();
        let scaled_unit = ParamTopcode::new(&p.unit()).unwrap().evaluate(0, k2).unwrap();
        prop_assert_eq!(lhs.numeric_rows().unwrap(), add(&p.evaluate(k1, d).unwrap(), &scaled_unit));
    }

    #[test]
    fn pronbs_candidates_regenerate(d in prop::collection::vec(0u8..10, 3..10)) {
        let s = DigitString::new(d, Ring::Mod10).unwrap();
        let bounds = PronbsBounds { max_q: 3, ..PronbsBounds::default() };
        let par = pronbs_solve(&s, &bounds, Exec::Auto).unwrap();
        for c in &par {
            prop_assert_eq!(c.regenerate().unwrap(), s.clone());
        }
        prop_assert_eq!(par, pronbs_solve(&s, &bounds, Exec::Sequential).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn distinct_cells_give_720_strings(cells in Just((0i64..10).collect::<Vec<_>>()).prop_shuffle()) {
        let t = TopcodeMatrix::numeric(&cells[0..2], &cells[2..4], &cells[4..6]).unwrap();
        let strings: BTreeSet<String> = (0..720u32)
            .map(|r| string_from_topcode(&t, &PermIndex::from_rank(6, &BigUint::from(r)).unwrap()).unwrap().to_string())
            .collect();
        prop_assert_eq!(strings.len(), 720);
    }
}
