//! Marching squares over a square window, plus clipping of the resulting
//! polylines against inequality constraints.

use std::collections::HashMap;

use rayon::prelude::*;

pub type P2 = [f64; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline2 {
    pub pts: Vec<P2>,
    pub closed: bool,
}

/// A square grid of `cells × cells` cells covering `[-half, half]²`.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub half: f64,
    pub cells: usize,
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half / self.cells as f64
    }

    fn coord(&self, i: usize) -> f64 {
        -self.half + self.spacing() * i as f64
    }
}

/// Zero level set of `f` on the grid. Values `≥ 0` count as inside.
pub fn march<F>(grid: Grid, f: F) -> Vec<Polyline2>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let n = grid.cells;
    let m = n + 1;
    let vals: Vec<f64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = grid.coord(j);
            let f = &f;
            (0..m).map(move |i| f(grid.coord(i), y))
        })
        .collect();
    march_values(grid, &vals, &f)
}

fn march_values<F>(grid: Grid, vals: &[f64], f: &F) -> Vec<Polyline2>
where
    F: Fn(f64, f64) -> f64,
{
    let n = grid.cells;
    let m = n + 1;
    let v = |i: usize, j: usize| vals[j * m + i];
    let inside = |x: f64| x >= 0.0;
    // edge ids: horizontal (i,j)-(i+1,j) = 2(jm+i), vertical (i,j)-(i,j+1) = 2(jm+i)+1
    let h_edge = |i: usize, j: usize| 2 * (j * m + i);
    let v_edge = |i: usize, j: usize| 2 * (j * m + i) + 1;

    let mut segs: Vec<(usize, usize)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let c = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            let mut case = 0;
            for (k, &val) in c.iter().enumerate() {
                if inside(val) {
                    case |= 1 << k;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            // cell edges: 0 bottom, 1 right, 2 top, 3 left
            let e = [h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)];
            let mut push = |a: usize, b: usize| segs.push((e[a], e[b]));
            match case {
                1 | 14 => push(3, 0),
                2 | 13 => push(0, 1),
                3 | 12 => push(3, 1),
                4 | 11 => push(1, 2),
                6 | 9 => push(0, 2),
                7 | 8 => push(2, 3),
                5 | 10 => {
                    let cx = grid.coord(i) + 0.5 * grid.spacing();
                    let cy = grid.coord(j) + 0.5 * grid.spacing();
                    let centre_in = inside(f(cx, cy));
                    let corner0_in = case == 5;
                    if centre_in == corner0_in {
                        // corners 0 and 2 are joined through the centre
                        push(3, 2);
                        push(0, 1);
                    } else {
                        push(3, 0);
                        push(1, 2);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let point_of = |id: usize| -> P2 {
        let base = id / 2;
        let (i, j) = (base % m, base / m);
        let (i2, j2) = if id % 2 == 0 { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (v(i, j), v(i2, j2));
        let (x0, y0) = (grid.coord(i), grid.coord(j));
        let (x1, y1) = (grid.coord(i2), grid.coord(j2));
        let at = |s: f64| [x0 + s * (x1 - x0), y0 + s * (y1 - y0)];
        // bisection keeps crossings exact even when features are far below the grid spacing
        let (mut lo, mut hi) = (0.0, 1.0);
        let a_in = inside(a);
        if inside(b) == a_in {
            return at(0.5);
        }
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let p = at(mid);
            if inside(f(p[0], p[1])) == a_in {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        at(0.5 * (lo + hi))
    };

    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segs.iter().enumerate() {
        adj.entry(a).or_default().push(k);
        adj.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();

    let walk = |start_edge: usize, used: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut chain = vec![start_edge];
        let mut cur = start_edge;
        loop {
            let next = adj[&cur].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segs[k];
            cur = if a == cur { b } else { a };
            if cur == start_edge {
                return (chain, true);
            }
            chain.push(cur);
        }
        (chain, false)
    };

    // open chains first, from their dangling ends, in a deterministic order
    let mut ends: Vec<usize> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(&k, _)| k).collect();
    ends.sort_unstable();
    for e in ends {
        if adj[&e].iter().all(|&k| used[k]) {
            continue;
        }
        let (chain, closed) = walk(e, &mut used);
        out.push(Polyline2 { pts: chain.into_iter().map(point_of).collect(), closed });
    }
    for k in 0..segs.len() {
        if used[k] {
            continue;
        }
        let start = segs[k].0;
        let (chain, closed) = walk(start, &mut used);
        out.push(Polyline2 { pts: chain.into_iter().map(point_of).collect(), closed });
    }
    out.retain(|p| p.pts.len() >= 2);
    out
}

/// Keeps the parts of a polyline where `g ≥ 0`, cutting segments at the
/// boundary by bisection on `g`.
pub fn clip<G>(line: &Polyline2, g: G) -> Vec<Polyline2>
where
    G: Fn(P2) -> f64,
{
    let pts = &line.pts;
    let n = pts.len();
    if n == 0 {
        return Vec::new();
    }
    let ok: Vec<bool> = pts.iter().map(|&p| g(p) >= 0.0).collect();
    if ok.iter().all(|&b| b) {
        return vec![line.clone()];
    }
    if ok.iter().all(|&b| !b) {
        return Vec::new();
    }
    let cut = |a: P2, b: P2| -> P2 {
        // a inside, b outside
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let p = [a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])];
            if g(p) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        [a[0] + lo * (b[0] - a[0]), a[1] + lo * (b[1] - a[1])]
    };

    // start the walk at an outside vertex so runs never wrap
    let start = if line.closed { ok.iter().position(|&b| !b).unwrap() } else { 0 };
    let count = if line.closed { n + 1 } else { n };
    let idx = |k: usize| (start + k) % n;

    let mut out = Vec::new();
    let mut cur: Vec<P2> = Vec::new();
    for k in 0..count {
        let i = idx(k);
        if ok[i] {
            if cur.is_empty() && k > 0 && !ok[idx(k - 1)] {
                cur.push(cut(pts[i], pts[idx(k - 1)]));
            }
            cur.push(pts[i]);
        } else if !cur.is_empty() {
            cur.push(cut(pts[idx(k - 1)], pts[i]));
            out.push(Polyline2 { pts: std::mem::take(&mut cur), closed: false });
        }
    }
    if !cur.is_empty() {
        out.push(Polyline2 { pts: cur, closed: false });
    }
    out.retain(|p| p.pts.len() >= 2);
    out
}
