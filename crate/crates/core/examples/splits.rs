//! Random and item cold-start splits, written to disk and read back.

use sgur::eval::{split_cold_start, split_random, EvalSplit, SplitPart};
use sgur::synth::random_graph;

fn main() -> sgur::Result<()> {
    let graph = random_graph(500, 400, 2, 30, 11);
    println!("{} users, {} items, {} edges", graph.num_users(), graph.num_items(), graph.num_edges());

    let random = split_random(&graph, (0.8, 0.1, 0.1), 0)?;
    let cold = split_cold_start(&graph, 0.2, 0)?;
    for (name, split) in [("random", &random), ("cold-start", &cold)] {
        print!("{name:<11}");
        for part in SplitPart::ALL {
            print!(" {}={}", part.name(), split.part(part).len());
        }
        println!(" cold_items={}", split.cold_items.len());
    }

    let (val_items, test_items) = sgur::eval::split::cold_halves(&cold);
    println!("cold halves: {} val items, {} test items", val_items.len(), test_items.len());

    let dir = std::env::temp_dir().join("sgur_split_example");
    cold.write(&dir)?;
    assert_eq!(EvalSplit::read(&dir)?, cold);
    println!("round-tripped through {}", dir.display());
    Ok(())
}
