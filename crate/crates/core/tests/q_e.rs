use explain_core::eval::q_e;
use num_rational::Ratio;

/// Direct formula on floating cross-multiplied integers: Q_E * n = p * n + sum.
fn direct(prefix: u8, ratings: &[u8]) -> (i64, i64) {
    let n = ratings.len() as i64;
    let sum: i64 = ratings.iter().map(|&r| r as i64).sum();
    (prefix as i64 * n + sum, n)
}

fn all_lists(max_len: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for list in &frontier {
            for r in 1..=3u8 {
                let mut l: Vec<u8> = list.clone();
                l.push(r);
                next.push(l);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn worked_example_is_four() {
    assert_eq!(q_e(3, &[1]).unwrap(), Ratio::from_integer(4));
}

#[test]
fn exhaustive_against_direct_formula() {
    let mut checked = 0;
    for prefix in 1..=3u8 {
        for list in all_lists(3) {
            if list.is_empty() {
                assert!(q_e(prefix, &list).is_err());
                continue;
            }
            let got = q_e(prefix, &list).unwrap();
            let (num, den) = direct(prefix, &list);
            assert_eq!(*got.numer() * den, num * *got.denom(), "{prefix} {list:?}");
            assert!(got >= Ratio::from_integer(2) && got <= Ratio::from_integer(6));
            checked += 1;
        }
    }
    assert_eq!(checked, 3 * (3 + 9 + 27));
}

#[test]
fn out_of_range_ratings_rejected() {
    assert!(q_e(0, &[3]).is_err());
    assert!(q_e(4, &[3]).is_err());
    assert!(q_e(3, &[3, 0]).is_err());
}

#[test]
fn monotone_in_each_rating() {
    for list in all_lists(3).into_iter().filter(|l| !l.is_empty()) {
        for i in 0..list.len() {
            if list[i] < 3 {
                let mut up = list.clone();
                up[i] += 1;
                assert!(q_e(2, &up).unwrap() > q_e(2, &list).unwrap());
            }
        }
        assert!(q_e(3, &list).unwrap() > q_e(2, &list).unwrap());
    }
}
