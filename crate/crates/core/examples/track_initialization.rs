//! M/K track initiation: tentative slots gather returns within the gate
//! T_d and confirm on the K-th consecutive hit. Shows a clean confirmation,
//! a slot cleared by a missed scan, and a false alarm that never confirms.
//!
//! cargo run --release --example track_initialization

use cradar::sensing::{Measurement, Origin};
use cradar::trackinit::InitBank;

fn at(x: f64, y: f64, origin: Origin) -> Measurement {
    Measurement {
        range: x.hypot(y),
        azimuth: y.atan2(x),
        origin,
    }
}

fn main() {
    let mut bank = InitBank::new(5, 1000.0, 3);
    // target 1 moves 300 m per slot; target 2 is missed on slot 1;
    // a false alarm appears once on slot 0
    let scans = [
        vec![
            at(8000.0, 0.0, Origin::Target(1)),
            at(-4000.0, 9000.0, Origin::Target(2)),
            at(15_000.0, -2000.0, Origin::FalseAlarm),
        ],
        vec![at(8300.0, 0.0, Origin::Target(1))],
        vec![at(8600.0, 0.0, Origin::Target(1)), at(-4200.0, 9100.0, Origin::Target(2))],
        vec![at(-4400.0, 9200.0, Origin::Target(2))],
        vec![at(-4600.0, 9300.0, Origin::Target(2))],
    ];
    for (slot, scan) in scans.iter().enumerate() {
        let confirmed = bank.process_scan(scan, slot as u64, 0);
        let tentative: Vec<String> = bank
            .slots()
            .iter()
            .map(|s| format!("#{}:{} hit(s)", s.slot_id, s.hit_count()))
            .collect();
        println!("slot {slot}: {} return(s), tentative [{}]", scan.len(), tentative.join(", "));
        for c in confirmed {
            println!("  confirmed {:?} after {} hits", c.history.last().map(|m| m.origin), c.history.len());
        }
    }
}
