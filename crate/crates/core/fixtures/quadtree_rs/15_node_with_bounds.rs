//@ unit Func:quadtree_node_with_bounds
pub fn quadtree_node_with_bounds(
    minx: f64,
    miny: f64,
    maxx: f64,
    maxy: f64,
) -> Option<Box<QuadtreeNode>> {
    let mut node = quadtree_node_new()?;
    let mut bounds = quadtree_bounds_new()?;
    quadtree_bounds_extend(&mut bounds, maxx, maxy);
    quadtree_bounds_extend(&mut bounds, minx, miny);
    node.bounds = Some(bounds);
    Some(node)
}
