//@ unit Func:quadtree_node_isempty
pub fn quadtree_node_isempty(node: &QuadtreeNode) -> bool {
    node.nw.is_none()
        && node.ne.is_none()
        && node.sw.is_none()
        && node.se.is_none()
        && !quadtree_node_isleaf(node)
}
