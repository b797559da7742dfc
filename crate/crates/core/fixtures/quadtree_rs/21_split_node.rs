//@ unit Func:split_node_
pub fn split_node_(key_free: Option<&dyn Fn(Option<usize>)>, node: &mut QuadtreeNode) -> i32 {
    let Some(b) = node.bounds.as_deref() else {
        return 0;
    };
    let (x, y) = (b.nw.x, b.nw.y);
    let hw = b.width / 2.0;
    let hh = b.height / 2.0;

    let Some(nw) = quadtree_node_with_bounds(x, y - hh, x + hw, y) else {
        return 0;
    };
    let Some(ne) = quadtree_node_with_bounds(x + hw, y - hh, x + hw * 2.0, y) else {
        return 0;
    };
    let Some(sw) = quadtree_node_with_bounds(x, y - hh * 2.0, x + hw, y - hh) else {
        return 0;
    };
    let Some(se) = quadtree_node_with_bounds(x + hw, y - hh * 2.0, x + hw * 2.0, y - hh) else {
        return 0;
    };
    node.nw = Some(nw);
    node.ne = Some(ne);
    node.sw = Some(sw);
    node.se = Some(se);

    match node.point.take() {
        Some(old) => insert_(key_free, node, old),
        None => 0,
    }
}
