//@ unit Func:find_
pub fn find_(node: Option<&QuadtreeNode>, x: f64, y: f64) -> Option<&QuadtreePoint> {
    let node = node?;
    if quadtree_node_isleaf(node) {
        let p = node.point.as_deref()?;
        if p.x == x && p.y == y {
            return Some(p);
        }
    } else if quadtree_node_ispointer(node) {
        let test = QuadtreePoint { x, y, key: None };
        let quadrant = [&node.nw, &node.ne, &node.sw, &node.se]
            .into_iter()
            .map(|c| c.as_deref())
            .find(|c| node_contains_(*c, &test))
            .flatten();
        return find_(quadrant, x, y);
    }
    None
}
