mod common;

use common::*;
use numur_core::eval::rank;
use numur_core::{mrr_forget, partition};
use proptest::prelude::*;

proptest! {
    #![proptest_config(proptest_config(200))]

    #[test]
    fn mrr_matches_exhaustive_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        if let Err(e) = mrr_case(&mut r) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn ranking_is_a_sorted_permutation_of_the_pool(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, 30);
        let m = coarse_model(&mut r, d.vocab_size(), 2);
        for (qi, _) in d.queries().iter().enumerate() {
            let q = numur_core::QueryIdx(qi as u32);
            if d.pool(q).is_empty() {
                continue;
            }
            let ranked = rank(&m, &d, q).unwrap();
            let mut a = ranked.docs.clone();
            let mut b = d.pool(q).to_vec();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            for w in ranked.docs.windows(2).zip(ranked.scores.windows(2)) {
                let (docs, sc) = w;
                prop_assert!(sc[0] > sc[1] || (sc[0] == sc[1] && d.doc(docs[0]).id < d.doc(docs[1]).id));
            }
        }
    }
}

#[test]
fn worked_ranking_example() {
    let (d, m, spec) = ranking_example();
    let ranked = rank(&m, &d, d.query_idx("q1").unwrap()).unwrap();
    let ids: Vec<&str> = ranked.docs.iter().map(|&x| d.doc(x).id.as_str()).collect();
    assert_eq!(ids, ["d1", "d3", "d4", "d2"]);
    let p = partition(&d, &spec).unwrap();
    assert_eq!(mrr_forget(&m, &d, &p, &spec).unwrap().value, 0.25);
}
