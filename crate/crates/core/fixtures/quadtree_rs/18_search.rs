//@ unit Func:quadtree_search
pub fn quadtree_search(tree: &Quadtree, x: f64, y: f64) -> Option<&QuadtreePoint> {
    find_(tree.root.as_deref(), x, y)
}
