//! Silhouette of a small tree and the exact functionals built on it.

use tree_silhouette::silhouette::{
    eval_at, functionals, modulus_of_continuity, silhouette_of, tree_from_silhouette,
};
use tree_silhouette::{BinaryTree, NodePath};

fn main() {
    let nodes = ["-", "0", "1", "01", "010"];
    let tree = BinaryTree::validate(nodes.iter().map(|s| NodePath::parse(s).unwrap())).unwrap();

    let x = silhouette_of(&tree);
    print!("{}", x.to_csv());
    for s in [0.0, 0.3, 0.5, 0.9, 1.0] {
        println!("X_{s} = {}", eval_at(&tree, s).unwrap());
    }
    for k in 1..=4 {
        println!("measure of X = {k}: {}", x.preimage_measure(k));
    }
    assert_eq!(tree_from_silhouette(&x).unwrap(), tree);

    let f = functionals(&tree, tree.height() as u32).unwrap();
    println!("eta = {} = {}", f.eta, f.eta.to_f64());
    println!("eta - H_n = {:.6}", f.eta_centered);
    print!("{}", f.ynorm.to_csv());
    let inc: Vec<String> = f.ynorm.increments(2).unwrap().iter().map(|d| d.to_string()).collect();
    println!("increments at k = 2: {}", inc.join(", "));
    for delta in [0.5, 0.25, 0.125] {
        let w = modulus_of_continuity(&f.ynorm, delta).unwrap();
        println!("modulus at {delta}: {w}");
    }
}
