#ifndef QUADTREE_H
#define QUADTREE_H

#include <stdlib.h>

typedef struct quadtree_point {
  double x;
  double y;
  void *key;
} quadtree_point_t;

typedef struct quadtree_bounds {
  quadtree_point_t *nw;
  quadtree_point_t *se;
  double width;
  double height;
} quadtree_bounds_t;

typedef struct quadtree_node {
  struct quadtree_node *ne;
  struct quadtree_node *nw;
  struct quadtree_node *se;
  struct quadtree_node *sw;
  quadtree_bounds_t *bounds;
  quadtree_point_t *point;
} quadtree_node_t;

typedef struct quadtree {
  quadtree_node_t *root;
  void (*key_free)(void *key);
  unsigned int length;
} quadtree_t;

quadtree_point_t *quadtree_point_new(double x, double y);
void quadtree_point_free(quadtree_point_t *point);

quadtree_bounds_t *quadtree_bounds_new(void);
void quadtree_bounds_extend(quadtree_bounds_t *bounds, double x, double y);
void quadtree_bounds_free(quadtree_bounds_t *bounds);

quadtree_node_t *quadtree_node_new(void);
quadtree_node_t *quadtree_node_with_bounds(double minx, double miny, double maxx, double maxy);
int quadtree_node_ispointer(quadtree_node_t *node);
int quadtree_node_isempty(quadtree_node_t *node);
int quadtree_node_isleaf(quadtree_node_t *node);
void quadtree_node_free(quadtree_node_t *node, void (*key_free)(void *));

quadtree_t *quadtree_new(double minx, double miny, double maxx, double maxy);
int quadtree_insert(quadtree_t *tree, void *key, double x, double y);
quadtree_point_t *quadtree_search(quadtree_t *tree, double x, double y);
void quadtree_free(quadtree_t *tree);

#endif
