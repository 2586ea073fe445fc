// Summary statistics of a network read from an edge list.
//
// `cargo run --example network_stats -- path/to/edges.txt`

use blockforge::graph::{load_network, network_stats, LoadOptions};
use blockforge::{Network, NetworkFormat};

fn show(name: &str, g: &Network) {
    let s = network_stats(g);
    let opt = |x: Option<f64>| x.map_or("NA".to_string(), |v| format!("{v:.4}"));
    println!("{name}: n = {}, edges = {}", g.n(), g.n_edges());
    println!("  density        {:.4}", s.density);
    println!("  transitivity   {:.4}", s.transitivity);
    println!("  assortativity  {}", opt(s.assortativity));
    println!(
        "  mean degree    {:.4} (sd {:.4})",
        s.mean_degree, s.sd_degree
    );
    println!("  mean distance  {}", opt(s.mean_distance));
}

pub fn run(path: Option<&str>) -> blockforge::Result<()> {
    if let Some(p) = path {
        let g = load_network(p, NetworkFormat::EdgeList, LoadOptions::default())?;
        show(p, &g);
        return Ok(());
    }
    // two triangles joined by a bridge, plus an isolated node
    let g = Network::from_edges(
        7,
        vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)],
    )?;
    show("two triangles", &g);
    println!("\nas an edge list:\n{}", g.to_edge_list_string());
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(std::env::args().nth(1).as_deref())
}
