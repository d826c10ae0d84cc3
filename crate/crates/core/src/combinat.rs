//! Small enumeration helpers.

/// Calls `f` on every `k`-subset of `items` (in lexicographic order) until it returns `true`.
pub fn for_each_combination<T: Copy>(items: &[T], k: usize, f: &mut dyn FnMut(&[T]) -> bool) {
    fn rec<T: Copy>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, f: &mut dyn FnMut(&[T]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            if rec(items, k, i + 1, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// All maps `0..n -> 0..k`, as value vectors, in lexicographic order.
pub fn all_maps(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if n == 0 {
        1
    } else if k == 0 {
        0
    } else {
        k.checked_pow(n as u32).expect("too many maps")
    };
    (0..total).map(move |mut code| {
        let mut v = vec![0; n];
        for slot in v.iter_mut().rev() {
            *slot = code % k;
            code /= k;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(all_maps(3, 2).count(), 8);
        assert_eq!(all_maps(0, 5).count(), 1);
        let mut n = 0;
        for_each_combination(&[1, 2, 3, 4, 5], 2, &mut |_| {
            n += 1;
            false
        });
        assert_eq!(n, 10);
    }
}
