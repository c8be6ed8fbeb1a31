//! Digital search trees: external-node dynamics, the greedy optimum, and
//! the leftmost depth as a pure-birth chain.

use tree_silhouette::growth::{opt_eta, opt_eta_gap, Frontier, Grower};
use tree_silhouette::{BinaryTree, LevelSequence, Model, RngStream};

fn main() {
    let mut rng = RngStream::new(3);

    let mut g = Grower::new(Model::Dst, BinaryTree::empty());
    for _ in 0..500 {
        g.step(&mut rng);
    }
    let levels = LevelSequence::from_tree(g.tree());
    let n = 500u64;
    println!("DST on {n} nodes: eta = {:.4}", levels.eta_f64());
    println!("greedy optimum:   eta = {:.4}", opt_eta(n).to_f64());
    println!("log2 n + phi({{log2 n}}) = {:.4}", (n as f64).log2() + opt_eta_gap(n));

    let f = Frontier::of(g.tree());
    println!("frontier: {} external nodes", f.len());

    let mut visits = [0u64; 5];
    let mut moves = [0u64; 5];
    for _ in 0..20_000 {
        let mut g = Grower::new(Model::Dst, BinaryTree::empty());
        let mut x = 0;
        while x < 5 {
            let u = g.step(&mut rng);
            visits[x] += 1;
            if u.depth() == x && !u.bits().any(|b| b) {
                moves[x] += 1;
                x += 1;
            }
        }
    }
    for k in 0..5 {
        println!(
            "state {k}: step probability {:.4} (2^-{k} = {:.4})",
            moves[k] as f64 / visits[k] as f64,
            0.5f64.powi(k as i32)
        );
    }
}
