//@ unit Func:quadtree_node_ispointer
pub fn quadtree_node_ispointer(node: &QuadtreeNode) -> bool {
    node.nw.is_some()
        && node.ne.is_some()
        && node.sw.is_some()
        && node.se.is_some()
        && !quadtree_node_isleaf(node)
}
