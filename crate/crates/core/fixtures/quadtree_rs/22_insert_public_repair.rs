//@ repair Func:quadtree_insert
pub fn quadtree_insert(tree: &mut Quadtree, key: Option<usize>, x: f64, y: f64) -> i32 {
    let Some(mut point) = quadtree_point_new(x, y) else {
        return 0;
    };
    point.key = key;
    // The root is borrowed, not moved, for the containment test.
    if !node_contains_(tree.root.as_deref(), &point) {
        return 0;
    }
    let Some(root) = tree.root.as_deref_mut() else {
        return 0;
    };
    let status = insert_(tree.key_free.as_deref(), root, point);
    if status == 1 {
        tree.length += 1;
    }
    status
}
