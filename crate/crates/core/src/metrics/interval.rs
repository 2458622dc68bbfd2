use crate::flash::Tick;

/// Sorted, disjoint cover of `v`.
pub fn merge(mut v: Vec<(Tick, Tick)>) -> Vec<(Tick, Tick)> {
    v.retain(|(s, e)| e > s);
    v.sort_unstable();
    let mut out: Vec<(Tick, Tick)> = Vec::with_capacity(v.len());
    for (s, e) in v {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

pub fn measure(v: &[(Tick, Tick)]) -> Tick {
    v.iter().map(|(s, e)| e - s).sum()
}

/// Length of the overlap of two merged interval lists.
pub fn overlap(a: &[(Tick, Tick)], b: &[(Tick, Tick)]) -> Tick {
    let (mut i, mut j, mut total) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let s = a[i].0.max(b[j].0);
        let e = a[i].1.min(b[j].1);
        if e > s {
            total += e - s;
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}
