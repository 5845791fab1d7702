use super::scenario::ScanData;
use super::sensor::SensorModel;
use crate::{Error, Result};

/// Thresholds of the clustering clutter filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    /// Connection distance in units of the mapped noise std, `d = l·σ_v`.
    pub l: f64,
    /// Expected cluster size as a fraction of the covering sensors, `p_i = factor·N_i`.
    pub factor: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self { l: 3.0, factor: 0.8 }
    }
}

impl ClusterParams {
    pub fn with_l(l: f64) -> Self {
        Self { l, ..Self::default() }
    }
}

/// An observation inverted into position space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterPoint {
    pub pos: [f64; 2],
    pub sensor: usize,
    /// Largest std of the observation noise mapped to position space.
    pub sigma: f64,
}

/// Inverts every observation of every sensor (`scans[s]` from `sensors[s]`).
pub fn map_scans(scans: &[&ScanData], sensors: &[SensorModel]) -> Vec<ClusterPoint> {
    let mut points = Vec::new();
    for (s, (scan, sensor)) in scans.iter().zip(sensors).enumerate() {
        for z in &scan.observations {
            let c = sensor.mapped_cov(*z);
            let tr = c[0][0] + c[1][1];
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            let largest = tr / 2.0 + ((tr * tr / 4.0 - det).max(0.0)).sqrt();
            points.push(ClusterPoint {
                pos: sensor.invert(*z),
                sensor: s,
                sigma: largest.sqrt(),
            });
        }
    }
    points
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn mean(points: &[ClusterPoint], idx: &[usize]) -> [f64; 2] {
    let n = idx.len() as f64;
    let s = idx.iter().fold([0.0, 0.0], |acc, &i| {
        [acc[0] + points[i].pos[0], acc[1] + points[i].pos[1]]
    });
    [s[0] / n, s[1] / n]
}

/// Keeps at most one point per sensor, the one closest to `anchor`.
fn one_per_sensor(points: &[ClusterPoint], idx: &[usize], anchor: [f64; 2]) -> Vec<usize> {
    let mut best: Vec<(usize, usize, f64)> = Vec::new();
    for &i in idx {
        let d = dist(points[i].pos, anchor);
        match best.iter_mut().find(|b| b.0 == points[i].sensor) {
            Some(b) if d < b.2 => *b = (points[i].sensor, i, d),
            Some(_) => {}
            None => best.push((points[i].sensor, i, d)),
        }
    }
    best.into_iter().map(|b| b.1).collect()
}

/// Agglomerates `idx` into at most `k` groups, never merging two groups that
/// share a sensor; returns the `k` largest groups.
fn constrained_groups(points: &[ClusterPoint], idx: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = idx.iter().map(|&i| vec![i]).collect();
    while groups.len() > k {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let shared = groups[a]
                    .iter()
                    .any(|&i| groups[b].iter().any(|&j| points[i].sensor == points[j].sensor));
                if shared {
                    continue;
                }
                let d = dist(mean(points, &groups[a]), mean(points, &groups[b]));
                if best.is_none_or(|x| d < x.2) {
                    best = Some((a, b, d));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let moved = groups.swap_remove(b);
        groups[a].extend(moved);
    }
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));
    groups.truncate(k);
    groups
}

/// Clutter filtering by cross-sensor clustering of inverted observations.
///
/// Points from different sensors closer than `l·σ_v` are connected. The
/// best-connected remaining point and its `c` connections form a cluster,
/// which yields one estimate when `p_i ≤ c < 2p_i` and `⌊c/p_i⌋` estimates
/// when larger, where `p_i = factor·N_i` and `N_i` counts the sensors able
/// to detect at the point. Points with fewer connections are discarded as
/// clutter.
pub fn cluster_clutter_filter(
    points: &[ClusterPoint],
    sensors: &[SensorModel],
    params: &ClusterParams,
) -> Result<Vec<[f64; 2]>> {
    if sensors.len() < 2 {
        return Err(Error::InvalidInput("clustering needs at least two sensors".into()));
    }
    if !(params.l > 0.0) || !(params.factor > 0.0) {
        return Err(Error::InvalidInput("cluster thresholds must be positive".into()));
    }
    let n = points.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&points[i], &points[j]);
            if a.sensor != b.sensor && dist(a.pos, b.pos) < params.l * a.sigma.max(b.sigma) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }

    let mut consumed = vec![false; n];
    let mut estimates = Vec::new();
    loop {
        let live = |i: usize, consumed: &[bool]| adj[i].iter().filter(|&&j| !consumed[j]).count();
        let Some(seed) = (0..n)
            .filter(|&i| !consumed[i])
            .max_by_key(|&i| (live(i, &consumed), std::cmp::Reverse(i)))
        else {
            break;
        };
        let mut members = vec![seed];
        members.extend(adj[seed].iter().copied().filter(|&j| !consumed[j]));
        let covering = sensors
            .iter()
            .filter(|s| s.detection_probability(points[seed].pos) > 0.0)
            .count();
        let p_i = params.factor * covering as f64;
        let connections = (members.len() - 1) as f64;
        if connections < p_i {
            break;
        }
        let distinct = one_per_sensor(points, &members, points[seed].pos);
        if ((distinct.len() - 1) as f64) < p_i {
            consumed[seed] = true;
            continue;
        }
        if connections < 2.0 * p_i {
            estimates.push(mean(points, &distinct));
        } else {
            let k = (connections / p_i).floor() as usize;
            for g in constrained_groups(points, &members, k) {
                estimates.push(mean(points, &g));
            }
        }
        for &i in &members {
            consumed[i] = true;
        }
    }
    Ok(estimates)
}

/// Maps every sensor's scan and runs [`cluster_clutter_filter`].
pub fn cluster_scans(scans: &[&ScanData], sensors: &[SensorModel], params: &ClusterParams) -> Result<Vec<[f64; 2]>> {
    cluster_clutter_filter(&map_scans(scans, sensors), sensors, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtt::scenario::{generate_scenario, BirthModel, ScenarioConfig};
    use crate::prob::RngStream;

    fn camera(n: usize) -> Vec<SensorModel> {
        let mut s = SensorModel::camera(25.0, 0.0);
        s.p_d = 1.0;
        vec![s; n]
    }

    fn point(pos: [f64; 2], sensor: usize) -> ClusterPoint {
        ClusterPoint {
            pos,
            sensor,
            sigma: 5.0,
        }
    }

    #[test]
    fn single_target_gives_mean_of_mapped_points() {
        let mut cfg = ScenarioConfig::ghost(10, 0.0);
        cfg.ghost_targets = 0;
        cfg.sensor.p_d = 1.0;
        cfg.initial = vec![[10.0, 0.0, -20.0, 0.0, 0.0]];
        cfg.steps = 20;
        let sc = generate_scenario(&cfg, &mut RngStream::new(5, 0)).unwrap();
        let sensors = vec![cfg.sensor; 10];
        for k in 0..20 {
            let scans: Vec<&ScanData> = sc.scans.iter().map(|s| &s[k]).collect();
            let est = cluster_scans(&scans, &sensors, &ClusterParams::with_l(4.0)).unwrap();
            assert_eq!(est.len(), 1);
            let pts = map_scans(&scans, &sensors);
            let all: Vec<usize> = (0..pts.len()).collect();
            let oracle = mean(&pts, &all);
            assert!(dist(est[0], oracle) < 1e-9);
            assert!(dist(est[0], [10.0, -20.0]) < 4.0 * 5.0 / 10f64.sqrt());
        }
    }

    #[test]
    fn isolated_point_is_dropped() {
        let est = cluster_clutter_filter(&[point([0.0, 0.0], 0)], &camera(10), &ClusterParams::default()).unwrap();
        assert!(est.is_empty());
    }

    #[test]
    fn connection_threshold_is_strict() {
        // p_i = 1 with two sensors
        let p = ClusterParams { l: 3.0, factor: 0.5 };
        let d = 15.0;
        let near = [point([0.0, 0.0], 0), point([d - 1e-9, 0.0], 1)];
        let far = [point([0.0, 0.0], 0), point([d + 1e-9, 0.0], 1)];
        assert_eq!(cluster_clutter_filter(&near, &camera(2), &p).unwrap().len(), 1);
        assert!(cluster_clutter_filter(&far, &camera(2), &p).unwrap().is_empty());
    }

    #[test]
    fn same_sensor_points_never_connect() {
        let pts = [point([0.0, 0.0], 0), point([1.0, 0.0], 0)];
        assert!(cluster_clutter_filter(&pts, &camera(2), &ClusterParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_close_targets_split() {
        let mut pts = Vec::new();
        for s in 0..10 {
            let j = s as f64 * 0.3;
            pts.push(point([-6.0 + j, 0.0], s));
            pts.push(point([6.0 - j, 1.0], s));
        }
        let mut est = cluster_clutter_filter(&pts, &camera(10), &ClusterParams::with_l(4.0)).unwrap();
        est.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(est.len(), 2);
        assert!(est[0][0] < -2.0 && est[1][0] > 2.0);
    }

    #[test]
    fn clutter_alone_rarely_forms_clusters() {
        let mut cfg = ScenarioConfig::ct(10, 10.0);
        cfg.birth = BirthModel::none();
        cfg.steps = 10_000;
        let sc = generate_scenario(&cfg, &mut RngStream::new(8, 0)).unwrap();
        let sensors = vec![cfg.sensor; 10];
        let mut false_scans = 0;
        for k in 0..cfg.steps {
            let scans: Vec<&ScanData> = sc.scans.iter().map(|s| &s[k]).collect();
            if !cluster_scans(&scans, &sensors, &ClusterParams::default())
                .unwrap()
                .is_empty()
            {
                false_scans += 1;
            }
        }
        assert!(
            false_scans < 10,
            "{false_scans} of 10000 scans produced clutter estimates"
        );
    }

    #[test]
    fn needs_two_sensors() {
        assert!(cluster_clutter_filter(&[], &camera(1), &ClusterParams::default()).is_err());
    }
}
