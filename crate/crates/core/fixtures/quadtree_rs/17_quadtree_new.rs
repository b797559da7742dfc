//@ unit Func:quadtree_new
pub fn quadtree_new(minx: f64, miny: f64, maxx: f64, maxy: f64) -> Option<Box<Quadtree>> {
    let root = quadtree_node_with_bounds(minx, miny, maxx, maxy)?;
    Some(Box::new(Quadtree {
        root: Some(root),
        key_free: None,
        length: 0,
    }))
}
