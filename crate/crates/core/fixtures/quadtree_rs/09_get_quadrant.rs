//@ unit Func:get_quadrant_
pub fn get_quadrant_<'a>(
    root: &'a mut QuadtreeNode,
    point: &QuadtreePoint,
) -> Option<&'a mut QuadtreeNode> {
    if node_contains_(root.nw.as_deref(), point) {
        return root.nw.as_deref_mut();
    }
    if node_contains_(root.ne.as_deref(), point) {
        return root.ne.as_deref_mut();
    }
    if node_contains_(root.sw.as_deref(), point) {
        return root.sw.as_deref_mut();
    }
    if node_contains_(root.se.as_deref(), point) {
        return root.se.as_deref_mut();
    }
    None
}
