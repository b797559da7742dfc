//@ unit Func:main
/// Keys are indices into `LABELS`.
pub fn main() -> i32 {
    let Some(mut tree) = quadtree_new(1.0, 1.0, 10.0, 10.0) else {
        return 1;
    };
    quadtree_insert(&mut tree, Some(0), 8.0, 2.0);
    quadtree_insert(&mut tree, Some(1), 2.0, 8.0);
    quadtree_insert(&mut tree, Some(2), 8.0, 8.0);
    quadtree_insert(&mut tree, Some(3), 2.0, 2.0);
    let hit = quadtree_search(&tree, 2.0, 8.0);
    println!("length={} found={}", tree.length, i32::from(hit.is_some()));
    0
}
