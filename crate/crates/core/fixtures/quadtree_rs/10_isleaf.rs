//@ unit Func:quadtree_node_isleaf
pub fn quadtree_node_isleaf(node: &QuadtreeNode) -> bool {
    node.point.is_some()
}
