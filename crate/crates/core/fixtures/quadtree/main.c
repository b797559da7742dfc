#include <stdio.h>
#include "quadtree.h"

static int labels[4] = {10, 20, 30, 40};

int
main(void) {
  quadtree_t *tree = quadtree_new(1, 1, 10, 10);
  if (tree == NULL) return 1;
  quadtree_insert(tree, &labels[0], 8.0, 2.0);
  quadtree_insert(tree, &labels[1], 2.0, 8.0);
  quadtree_insert(tree, &labels[2], 8.0, 8.0);
  quadtree_insert(tree, &labels[3], 2.0, 2.0);
  quadtree_point_t *hit = quadtree_search(tree, 2.0, 8.0);
  printf("length=%u found=%d\n", tree->length, hit != NULL);
  quadtree_free(tree);
  return 0;
}
