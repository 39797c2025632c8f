//! Reading graph documents with decimal, fractional and surd lengths, and
//! what validation says about them.

use homocycle::graph::{parse_graph, validate_graph};

pub fn run_example() -> homocycle::Result<()> {
    let doc = r#"{
        "vertices": ["v1", "v2"],
        "edges": [
            {"id": "e1", "ends": ["v1", "v1"], "length": 1.25},
            {"id": "e2", "ends": ["v1", "v2"], "length": "2/3"},
            {"id": "e3", "ends": ["v2", "v1"], "length": {"q0": "1/2", "q1": 1}}
        ]
    }"#;
    let g = parse_graph(doc)?;
    for e in g.edges() {
        println!("{}: {} ≈ {:.12}", e.id, e.length, e.length.to_f64());
    }
    println!("{:?}", validate_graph(&g));
    let square = r#"{"vertices": ["a","b","c","d"], "edges": [
        {"id": "1", "ends": ["a","b"], "length": 1}, {"id": "2", "ends": ["b","c"], "length": 1},
        {"id": "3", "ends": ["c","d"], "length": 1}, {"id": "4", "ends": ["d","a"], "length": 1}]}"#;
    println!("4-cycle: {:?}", validate_graph(&parse_graph(square)?));
    println!("round trip: {}", parse_graph(&g.to_document())?.to_document() == g.to_document());
    Ok(())
}

fn main() -> homocycle::Result<()> {
    run_example()
}
