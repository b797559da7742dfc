#include "quadtree.h"

quadtree_bounds_t *
quadtree_bounds_new(void) {
  quadtree_bounds_t *bounds;
  if ((bounds = malloc(sizeof(*bounds))) == NULL)
    return NULL;
  bounds->nw = quadtree_point_new(0.0, 0.0);
  bounds->se = quadtree_point_new(0.0, 0.0);
  bounds->width = 0;
  bounds->height = 0;
  return bounds;
}

void
quadtree_bounds_extend(quadtree_bounds_t *bounds, double x, double y) {
  if (x < bounds->nw->x) bounds->nw->x = x;
  if (y > bounds->nw->y) bounds->nw->y = y;
  if (x > bounds->se->x) bounds->se->x = x;
  if (y < bounds->se->y) bounds->se->y = y;
  bounds->width = bounds->se->x - bounds->nw->x;
  bounds->height = bounds->nw->y - bounds->se->y;
}

void
quadtree_bounds_free(quadtree_bounds_t *bounds) {
  quadtree_point_free(bounds->nw);
  quadtree_point_free(bounds->se);
  free(bounds);
}
