//! Tree summation of term lists into addition layers.

use super::AddJob;
use crate::error::{Error, Result};

/// Schedules a pairwise reduction of every list.
///
/// At each level the surviving terms of a list are paired in order,
/// `(s0, s1), (s2, s3), ...`, each pair adding the earlier term into the
/// later one; an odd trailing term passes through untouched. Jobs from all
/// lists at the same level share one layer. Returns the layers and, per
/// list, the slot holding its total (always the last slot of the list).
pub fn addition_schedule(lists: &[Vec<usize>]) -> Result<(Vec<Vec<AddJob>>, Vec<usize>)> {
    if let Some(i) = lists.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("term list {i} is empty")));
    }
    let mut survivors: Vec<Vec<usize>> = lists.to_vec();
    let mut layers = Vec::new();
    while survivors.iter().any(|s| s.len() > 1) {
        let layer = layers.len() + 1;
        let mut jobs = Vec::new();
        for list in &mut survivors {
            let mut next = Vec::with_capacity(list.len().div_ceil(2));
            for pair in list.chunks(2) {
                match *pair {
                    [src, dst] => {
                        jobs.push(AddJob { src, dst, layer });
                        next.push(dst);
                    }
                    [last] => next.push(last),
                    _ => unreachable!(),
                }
            }
            *list = next;
        }
        layers.push(jobs);
    }
    let outputs = survivors.into_iter().map(|s| s[0]).collect();
    Ok((layers, outputs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_terms() {
        let (layers, out) = addition_schedule(&[vec![0, 12, 16, 19]]).unwrap();
        let pairs: Vec<Vec<(usize, usize)>> = layers
            .iter()
            .map(|l| l.iter().map(|j| (j.src, j.dst)).collect())
            .collect();
        assert_eq!(pairs, vec![vec![(0, 12), (16, 19)], vec![(12, 19)]]);
        assert_eq!(out, vec![19]);
    }

    #[test]
    fn single_term_needs_no_jobs() {
        let (layers, out) = addition_schedule(&[vec![7]]).unwrap();
        assert!(layers.is_empty());
        assert_eq!(out, vec![7]);
    }

    #[test]
    fn odd_lengths() {
        let (layers, out) = addition_schedule(&[vec![1, 2, 3, 4, 5], vec![9, 8]]).unwrap();
        let sizes: Vec<usize> = layers.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 1, 1]);
        assert_eq!(out, vec![5, 8]);
        assert_eq!(layers.iter().map(Vec::len).sum::<usize>(), 4 + 1);
    }

    #[test]
    fn empty_list_is_rejected() {
        assert!(addition_schedule(&[vec![1], vec![]]).is_err());
    }
}
