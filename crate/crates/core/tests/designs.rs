mod common;

use cofollow_core::community::Partition;
use cofollow_core::data_model::{
    build_features, FeatureConfig, FollowerDataset, Gender, IheType, InstitutionRecord, InstitutionTable, Online, Race,
    Religious,
};
use cofollow_core::graph::WeightedGraph;
use cofollow_core::metrics::{node_metrics, MetricOptions};
use cofollow_core::projection::{build_graph, normalize_weights, qualify, Normalization, WeightKind};
use cofollow_core::stats::{
    cluster_membership_fits, dyadic_design, monadic_design, monadic_fits, significance_table, DyadicCoding, DyadicKind,
    DyadicOptions, MembershipOptions, SkipReason,
};
use common::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_record(r: &mut ChaCha8Rng, i: usize) -> InstitutionRecord {
    let ihe = [IheType::Public, IheType::Private, IheType::CommunityCollege][r.random_range(0..3)];
    let mut rec = InstitutionRecord::new(format!("inst{i:03}"), ihe);
    rec.handle = format!("handle{i:03}");
    rec.state = ["CA", "NY", "TX", "OH"][r.random_range(0..4)].to_string();
    if ihe == IheType::Private && r.random_bool(0.4) {
        rec.religious = Religious::Christian;
    }
    rec.online = [Online::None, Online::SomeOnline, Online::LargeOnline][r.random_range(0..3)];
    rec.gender = if r.random_bool(0.1) { Gender::AllWomen } else { Gender::Coed };
    rec.race = [Race::None, Race::None, Race::Hsi][r.random_range(0..3)];
    rec.liberal_arts = r.random_bool(0.3);
    rec.sat_act_optional = r.random_bool(0.5);
    rec.common_app = r.random_bool(0.4);
    rec.no_app_fee = r.random_bool(0.3);
    rec.enrollment = Some(r.random_range(500..40_000));
    rec.tuition = Some(r.random_range(3_000.0..50_000.0));
    rec.account_age = r.random_range(1.0..12.0);
    rec.verified = r.random_bool(0.5);
    rec.favorites = r.random_range(0..5_000);
    rec.followers_count = r.random_range(100..100_000);
    rec.friends_count = r.random_range(0..3_000);
    rec.statuses = r.random_range(10..20_000);
    rec
}

fn table(seed: u64, n: usize) -> InstitutionTable {
    let mut r = rng(seed);
    InstitutionTable::new((0..n).map(|i| random_record(&mut r, i)).collect()).unwrap()
}

fn follower_lists(r: &mut ChaCha8Rng, t: &InstitutionTable, followers: usize) -> FollowerDataset {
    let lists: Vec<(String, Vec<String>)> = t
        .records()
        .iter()
        .map(|rec| (rec.id.clone(), (0..followers).filter(|_| r.random_bool(0.2)).map(|f| format!("u{f}")).collect()))
        .collect();
    FollowerDataset::from_lists(lists, 10_000).unwrap()
}

#[test]
fn feature_rows_follow_table_order_without_silent_drops() {
    let mut recs = table(1, 40).records().to_vec();
    recs[3].tuition = None;
    recs[17].enrollment = None;
    let t = InstitutionTable::new(recs).unwrap();
    let f = build_features(&t, &FeatureConfig::default()).unwrap();
    assert_eq!(f.ids, t.records().iter().map(|r| r.id.clone()).collect::<Vec<_>>());
    let complete = f.rows.iter().filter(|r| r.is_some()).count();
    assert_eq!(complete + f.flagged_count(), t.len());
    assert_eq!(f.missing[3], vec!["log_tuition"]);
    assert_eq!(f.missing[17], vec!["log_enrollment"]);
}

#[test]
fn monadic_design_joins_metrics_and_counters() {
    let t = table(2, 50);
    let mut r = rng(3);
    let ds = follower_lists(&mut r, &t, 200);
    let g = normalize_weights(build_graph(&ds, &qualify(&ds, 3).unwrap()), Normalization::Jaccard);
    let w = g.weighted(WeightKind::Normalized).unwrap();
    let m = node_metrics(&w, None, &MetricOptions::default()).unwrap();
    let f = build_features(&t, &FeatureConfig::default()).unwrap();
    let d = monadic_design(&f, &m, &g.nodes, &t, true).unwrap();
    assert_eq!(d.responses.len(), 9);
    assert_eq!(d.base.design.nrows(), 50);
    assert_eq!(d.dropped_rows, 0);
    assert!(d.base.dropped_columns.iter().any(|c| c.starts_with("gender=AllMen")));
    let posts = &d.responses[8];
    assert_eq!(posts.0, "posts");
    let v = d.base.nodes[0];
    assert_eq!(posts.1[0], (t.records()[v].statuses as f64).ln_1p());
    let fits = monadic_fits(&d).unwrap();
    assert_eq!(fits.len(), 9);
    let refs: Vec<(String, _)> = fits.iter().map(|(n, f)| (n.to_string(), f)).collect();
    let table = significance_table(&refs, 1.0);
    assert!(table.rows.iter().all(|r| r.name != "intercept"));
    assert!(table.to_markdown(3).contains("| Variable |"));
}

#[test]
fn dyadic_rows_are_symmetric_and_binary() {
    let t = table(4, 30);
    let mut r = rng(5);
    let ds = follower_lists(&mut r, &t, 150);
    let g = normalize_weights(build_graph(&ds, &qualify(&ds, 3).unwrap()), Normalization::Jaccard);
    let f = build_features(&t, &FeatureConfig::default()).unwrap();
    for coding in [DyadicCoding::Difference, DyadicCoding::Sameness] {
        let opts = DyadicOptions { coding, ..DyadicOptions::default() };
        let d = dyadic_design(&g, &f, &opts).unwrap();
        assert_eq!(d.rows.len(), g.edge_count());
        assert_eq!(d.excluded, 0);
        for (c, col) in d.columns.iter().enumerate() {
            if col.kind == DyadicKind::Indicator {
                assert!(d.rows.iter().all(|row| row[c] == 0.0 || row[c] == 1.0), "{}", col.name);
            }
        }
        let mut swapped = g.clone();
        for e in &mut swapped.edges {
            std::mem::swap(&mut e.a, &mut e.b);
        }
        assert_eq!(dyadic_design(&swapped, &f, &opts).unwrap().rows, d.rows);
    }
    let diff = dyadic_design(&g, &f, &DyadicOptions::default()).unwrap();
    let same = dyadic_design(&g, &f, &DyadicOptions { coding: DyadicCoding::Sameness, ..DyadicOptions::default() }).unwrap();
    for (a, b) in diff.rows.iter().zip(&same.rows) {
        for (c, col) in diff.columns.iter().enumerate() {
            match col.kind {
                DyadicKind::Indicator => assert_eq!(a[c] + b[c], 1.0),
                DyadicKind::AbsDifference => assert_eq!(a[c], b[c]),
            }
        }
    }
    assert!(diff.fit().is_ok());
}

#[test]
fn dyadic_excludes_edges_with_missing_endpoints() {
    let mut recs = table(6, 20).records().to_vec();
    recs[0].tuition = None;
    let t = InstitutionTable::new(recs).unwrap();
    let mut r = rng(7);
    let ds = follower_lists(&mut r, &t, 150);
    let g = normalize_weights(build_graph(&ds, &qualify(&ds, 3).unwrap()), Normalization::Jaccard);
    let f = build_features(&t, &FeatureConfig::default()).unwrap();
    let d = dyadic_design(&g, &f, &DyadicOptions::default()).unwrap();
    let touching = g.edges.iter().filter(|e| e.a == 0 || e.b == 0).count();
    assert!(touching > 0);
    assert_eq!(d.excluded, touching);
    assert_eq!(d.rows.len() + d.excluded, g.edge_count());
}

#[test]
fn planted_hbcu_cluster_is_detected() {
    // membership is noisy on purpose: exact HBCU membership would separate
    let mut r = rng(8);
    let n = 300;
    let mut recs: Vec<InstitutionRecord> = (0..n).map(|i| random_record(&mut r, i)).collect();
    for rec in recs.iter_mut().take(40) {
        rec.race = Race::Hbcu;
    }
    let t = InstitutionTable::new(recs).unwrap();
    let labels: Vec<usize> = t
        .records()
        .iter()
        .map(|rec| {
            let p = if rec.race == Race::Hbcu { 0.85 } else { 0.05 };
            usize::from(!r.random_bool(p))
        })
        .collect();
    let empty = WeightedGraph::from_edges(n, Vec::new()).unwrap();
    let part = Partition::from_labels(&labels, 1.0, 0, &empty);
    let ids: Vec<String> = t.records().iter().map(|r| r.id.clone()).collect();
    let f = build_features(&t, &FeatureConfig::default()).unwrap();
    let fits = cluster_membership_fits(&part, &ids, &f, &MembershipOptions::default()).unwrap();
    let hbcu_cluster = part.assignment[0];
    let (_, fit) = fits.fits.iter().find(|(c, _)| *c == hbcu_cluster).expect("cluster fitted");
    assert!(fit.coefficient("race=HBCU").unwrap() > 2.0);
    assert!(fit.p_value("race=HBCU").unwrap() < 0.01);
    assert!(!fits.without_significant.contains(&hbcu_cluster));
}

#[test]
fn cluster_fits_skip_small_and_isolated_clusters() {
    let t = table(9, 60);
    let mut labels = vec![0usize; 60];
    for (i, l) in labels.iter_mut().enumerate().skip(30) {
        *l = 1 + usize::from(i >= 57) + usize::from(i >= 59);
    }
    // clusters: 0 (30 nodes), 1 (27), 2 (2), 3 (isolate)
    let empty = WeightedGraph::from_edges(60, Vec::new()).unwrap();
    let part = Partition::from_labels(&labels, 1.0, 0, &empty);
    let ids: Vec<String> = t.records().iter().map(|r| r.id.clone()).collect();
    let f = build_features(&t, &FeatureConfig::default()).unwrap();
    let fits = cluster_membership_fits(&part, &ids, &f, &MembershipOptions::default()).unwrap();
    assert!(fits.skipped.contains(&(2, SkipReason::TooSmall { members: 2 })));
    assert!(fits.skipped.contains(&(3, SkipReason::Isolate)));
    assert_eq!(fits.fits.len() + fits.skipped.len(), 4);
}
