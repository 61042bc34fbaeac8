//! Prioritized replay: sampling frequencies follow the priority mass, and
//! importance weights flatten as the correction exponent grows.
//!
//!     cargo run --release --example per_sampling

use risuav::per::{Experience, PerBuffer, PerConfig};
use risuav::RngStream;

fn transition(i: usize) -> Experience {
    Experience {
        state: vec![i as f64],
        schedule: 0,
        params: vec![0.0; 3],
        reward: 0.0,
        next_state: vec![i as f64 + 1.0],
        terminal: false,
    }
}

fn main() -> risuav::Result<()> {
    let mut buf = PerBuffer::new(PerConfig { capacity: 6, ..PerConfig::default() });
    for i in 0..6 {
        buf.insert(transition(i));
    }
    let mut rng = RngStream::new(5, "example/per");

    // Assign |td| = 1..6 to the slots through a full-buffer sample.
    let mut seen = Vec::new();
    while seen.len() < 6 {
        for idx in buf.sample(6, 0.4, &mut rng)?.indices {
            if !seen.iter().any(|s: &risuav::per::ReplayIndex| s.slot == idx.slot) {
                seen.push(idx);
            }
        }
    }
    let td: Vec<f64> = seen.iter().map(|i| (i.slot + 1) as f64).collect();
    buf.update_priorities(&seen, &td)?;

    let draws = 60_000;
    let mut counts = [0usize; 6];
    for _ in 0..draws / 6 {
        for idx in buf.sample(6, 0.4, &mut rng)?.indices {
            counts[idx.slot] += 1;
        }
    }
    println!("{:>4} {:>9} {:>10} {:>10}", "slot", "priority", "expected", "observed");
    for (s, &c) in counts.iter().enumerate() {
        println!(
            "{s:>4} {:>9.3} {:>10.4} {:>10.4}",
            buf.priority(s),
            buf.probability(s),
            c as f64 / draws as f64
        );
    }

    println!("\nimportance weights of one batch as mu anneals");
    for mu in [0.0, 0.4, 0.7, 1.0] {
        let batch = buf.sample(4, mu, &mut rng)?;
        let w: Vec<String> = batch.weights.iter().map(|w| format!("{w:.3}")).collect();
        println!("mu {mu:.1}: [{}]", w.join(", "));
    }
    Ok(())
}
