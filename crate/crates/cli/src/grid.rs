/// Steps at which variance tables are evaluated: every power of two, the
/// step before it, three geometric midpoints per octave, and `t_max`.
pub fn variance_grid(t_max: usize) -> Vec<usize> {
    let mut ts = vec![t_max];
    let mut p = 1usize;
    while p <= t_max {
        ts.push(p);
        if p > 1 {
            ts.push(p - 1);
        }
        for j in 1..4 {
            ts.push((p as f64 * 2f64.powf(j as f64 / 4.0)).round() as usize);
        }
        p *= 2;
    }
    ts.retain(|&t| t >= 1 && t <= t_max);
    ts.sort_unstable();
    ts.dedup();
    ts
}
