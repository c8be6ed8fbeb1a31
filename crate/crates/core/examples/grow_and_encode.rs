//! Grow a random BST and DST, inspect their level profiles, and round-trip
//! them through the `treetext` format.

use tree_silhouette::growth::{bst_tree, grow_to, KeySequence};
use tree_silhouette::{codec, Model, RngStream};

fn main() {
    let mut rng = RngStream::new(2024);

    let keys = KeySequence::uniform(12, &mut rng);
    let bst = bst_tree(&keys);
    let dst = grow_to(Model::Dst, 12, &mut rng);

    for (name, tree) in [("bst", &bst), ("dst", &dst)] {
        let profile = tree.level_profile();
        let (height, fill) = tree.height_fill().expect("nonempty");
        println!("{name}: {} nodes, height {height}, fill {fill}", tree.len());
        println!("  U_k = {:?}", profile.counts());
        println!("  Kraft sum = {}", profile.kraft_sum());

        let text = codec::emit(tree);
        let back = codec::parse(&text).expect("emitted text parses");
        assert_eq!(&back, tree);
        println!("  treetext: {} lines, round-trip ok", text.lines().count());
    }

    print!("{}", codec::emit(&bst));
}
