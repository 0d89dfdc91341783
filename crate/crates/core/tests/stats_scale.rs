use std::time::{Duration, Instant};

use kgbench_core::stats::dataset_stats;
use kgbench_core::synthetic::preferential_attachment;
use kgbench_core::DatasetBundle;

/// Stats on a graph the size of the small released datasets.
#[test]
fn stats_on_small_dataset_scale_within_a_minute() {
    let bundle = DatasetBundle::new(preferential_attachment(85_346, 2, 40, 3));
    let start = Instant::now();
    let s = dataset_stats(&bundle);
    let elapsed = start.elapsed();
    assert_eq!(s.entities, 85_346);
    assert!(s.relations > 160_000);
    assert_eq!(s.components, 1);
    assert!(s.connected);
    assert!(s.min_degree >= 2);
    assert!(elapsed < Duration::from_secs(60), "{elapsed:?}");
}
