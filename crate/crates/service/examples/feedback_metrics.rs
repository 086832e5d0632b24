//! Replays two scripted feedback journals and prints the headline metrics.
//!
//! cargo run -p homeminer-service --example feedback_metrics

use homeminer_service::fixtures::feedback_journal;
use homeminer_service::{compute_metrics, MetricsWindow, Store};

fn main() {
    for (phase, sent, answered, useful) in [(1, 160, 76, 7), (2, 120, 55, 5)] {
        let mut store = Store::in_memory();
        for record in feedback_journal(20, sent, answered, useful) {
            store.submit(record).expect("scripted journal applies");
        }
        let m = compute_metrics(store.state(), MetricsWindow::all());
        println!(
            "phase {phase}: sent {:>3}  answered {:>3}  useful {:>2}  not useful {:>3}  ratio {}  ({:.2} per day)",
            m.recommendations_sent,
            m.answered,
            m.voted_useful,
            m.voted_not_useful,
            m.ratio_percent(),
            m.recs_per_day_per_home
        );
    }
}
