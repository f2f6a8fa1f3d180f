use std::collections::HashMap;

use linesift::features::{
    edit_distance, edit_sim, encode_line, levenshtein, table_lm_prob, SnCode, SnSymbol, TableTransitionModel,
};
use linesift::{AnnotatedDocument, Corpus, Error, Label, LineRecord};
use proptest::prelude::*;

/// Recursive definition over suffixes, memoized.
fn oracle(a: &[SnSymbol], b: &[SnSymbol], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return a.len() + b.len();
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let d = (oracle(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]))
        .min(oracle(&a[1..], b, memo) + 1)
        .min(oracle(a, &b[1..], memo) + 1);
    memo.insert((a.len(), b.len()), d);
    d
}

fn sn_code() -> impl Strategy<Value = SnCode> {
    prop::collection::vec(
        prop::bool::ANY.prop_map(|s| if s { SnSymbol::S } else { SnSymbol::N }),
        0..14,
    )
    .prop_map(SnCode)
}

proptest! {
    #[test]
    fn distance_matches_oracle(a in sn_code(), b in sn_code()) {
        prop_assert_eq!(edit_distance(&a, &b), oracle(&a.0, &b.0, &mut HashMap::new()));
    }

    #[test]
    fn distance_is_a_metric(a in sn_code(), b in sn_code(), c in sn_code()) {
        let d = edit_distance;
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(d(&a, &b) >= a.len().abs_diff(b.len()));
        prop_assert!(d(&a, &b) <= a.len().max(b.len()));
    }

    #[test]
    fn similarity_is_in_unit_interval(a in sn_code(), b in sn_code()) {
        let s = edit_sim(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s == 1.0, a == b);
    }

    #[test]
    fn transition_probabilities_sum_to_one(
        s in 0u64..50, n in 0u64..50, ss in 0u64..50, sn in 0u64..50, ns in 0u64..50, nn in 0u64..50,
    ) {
        let m = TableTransitionModel::from_counts([s, n], [[ss, sn], [ns, nn]], 1.0);
        // all codes of length 3 form a distribution
        let mut total = 0.0;
        for bits in 0..8u8 {
            let code = SnCode((0..3).map(|i| if bits >> i & 1 == 1 { SnSymbol::N } else { SnSymbol::S }).collect());
            total += table_lm_prob(&code, &m).unwrap();
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn levenshtein_on_words() {
    let a: Vec<char> = "kitten".chars().collect();
    let b: Vec<char> = "sitting".chars().collect();
    assert_eq!(levenshtein(&a, &b), 3);
    assert_eq!(levenshtein::<char>(&[], &b), 7);
}

#[test]
fn encoding_uses_numerals_and_symbols() {
    use SnSymbol::{N, S};
    assert_eq!(encode_line("Accuracy 91.5 % 88"), SnCode(vec![S, N, S, N]));
    assert_eq!(encode_line("").0, Vec::<SnSymbol>::new());
}

/// Counts by hand on a second fixture: two documents, table lines only.
#[test]
fn table_lm_hand_counts() {
    let doc = |id: &str, rows: &[(&str, Label)]| {
        AnnotatedDocument::new(id, rows.iter().map(|(t, l)| LineRecord::labeled(*t, *l)).collect())
    };
    let corpus = Corpus::new(vec![
        doc(
            "a",
            &[
                ("1 2", Label::Table),       // N N
                ("x 3 y", Label::Table),     // S N S
                ("int x = 4;", Label::Code), // ignored
            ],
        ),
        doc("b", &[("a b c", Label::Table)]), // S S S
    ])
    .unwrap();
    let m = TableTransitionModel::train_on_corpus(&corpus);
    // starts: S 2, N 1 -> (2+1)/5, (1+1)/5
    // from S: S->S 2, S->N 1 -> 3/5, 2/5; from N: N->N 1, N->S 1 -> 2/4, 2/4
    let cases = [
        ("9", 2.0 / 5.0),
        ("q", 3.0 / 5.0),
        ("q 9 9", 3.0 / 5.0 * 2.0 / 5.0 * 2.0 / 4.0),
        ("5 w w", 2.0 / 5.0 * 2.0 / 4.0 * 3.0 / 5.0),
    ];
    for (line, want) in cases {
        let got = table_lm_prob(&encode_line(line), &m).unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "{line}: {got} vs {want}");
    }
    assert!(matches!(table_lm_prob(&encode_line(""), &m), Err(Error::EmptyLine)));
}
