//! Shared fixtures for unit tests.

use alloc::format;
use alloc::vec;

use crate::corpus::{Dataset, DatasetBuilder, Label};

/// Seven samples over five queries and five documents: q1 holds d1 and d2,
/// d2 is shared by q1, q2 and q3, q4 holds d3 and d4, q5 holds d5.
pub(crate) fn worked_example(all_positive: bool) -> Dataset {
    let mut b = DatasetBuilder::new(16);
    for i in 1..=5u32 {
        b.query(format!("q{i}"), vec![i]).unwrap();
        b.document(format!("d{i}"), vec![i + 5]).unwrap();
    }
    let pairs = [
        ("q1", "d1"),
        ("q1", "d2"),
        ("q2", "d2"),
        ("q3", "d2"),
        ("q4", "d3"),
        ("q4", "d4"),
        ("q5", "d5"),
    ];
    for (i, (q, d)) in pairs.iter().enumerate() {
        let label = if all_positive || i % 2 == 0 {
            Label::Positive
        } else {
            Label::Negative
        };
        b.pool_entry(q, d).unwrap();
        b.sample(q, d, label).unwrap();
    }
    b.build().unwrap()
}

