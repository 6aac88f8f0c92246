#include <doctest.h>

#include "gqec/exceptions.hpp"
#include "gqec/lattice.hpp"

using namespace gqec;

TEST_CASE("ring lattices wire up periodically") {
  Lattice r = Lattice::ring(3);
  CHECK(r.num_vertices() == 3);
  CHECK(r.num_links() == 3);
  CHECK(r.link(2) == Link{2, 0});
  CHECK(r.out_links(0) == std::vector<int>{0});
  CHECK(r.in_links(0) == std::vector<int>{2});
  CHECK(r.loop_rank() == 1);
  CHECK(r.girth() == 3);
  CHECK_FALSE(r.is_bipartite());
  CHECK(Lattice::ring(4).is_bipartite());
  CHECK(Lattice::ring(2).girth() == 2);  // digon of parallel links
  CHECK_THROWS_AS(Lattice::ring(1), TooSmall);
}

TEST_CASE("torus lattices have two links per vertex") {
  Lattice t = Lattice::torus(2, 2);
  CHECK(t.num_vertices() == 4);
  CHECK(t.num_links() == 8);
  CHECK(t.loop_rank() == 5);
  CHECK(t.link(0) == Link{0, 1});  // horizontal from (0,0)
  CHECK(t.link(1) == Link{0, 2});  // vertical from (0,0)
  CHECK(t.link(2) == Link{1, 0});  // horizontal wraps back
  CHECK(t.girth() == 2);           // parallel links on a width-2 torus
  CHECK(t.is_bipartite());

  Lattice t32 = Lattice::torus(3, 2);
  CHECK(t32.num_vertices() == 6);
  CHECK(t32.num_links() == 12);
  CHECK(t32.loop_rank() == 7);
  CHECK(t32.girth() == 2);
  CHECK_FALSE(t32.is_bipartite());  // odd cycle around the x direction
  CHECK_THROWS_AS(Lattice::torus(1, 3), TooSmall);
}

TEST_CASE("construction validates the link list") {
  CHECK_THROWS_AS(Lattice(1, {{0, 0}}), TooSmall);
  CHECK_THROWS_AS(Lattice(2, {}), TooSmall);
  CHECK_THROWS_AS(Lattice(2, {{0, 2}}), TooSmall);
  CHECK_THROWS_AS(Lattice(2, {{1, 1}}), TooSmall);  // self-loop
  CHECK_THROWS_AS(Lattice(4, {{0, 1}, {2, 3}}), Disconnected);
  Lattice ok(2, {{0, 1}, {0, 1}});  // parallel links are fine
  CHECK(ok.girth() == 2);
}

TEST_CASE("girth spots short cycles") {
  CHECK(Lattice::ring(5).girth() == 5);
  CHECK(Lattice(3, {{0, 1}, {1, 2}}).girth() == 0);  // a tree
  CHECK(Lattice(3, {{0, 1}, {1, 2}, {2, 1}}).girth() == 2);
}

TEST_CASE("stagger coloring alternates from the root") {
  Lattice r = Lattice::ring(4);
  CHECK(r.stagger_coloring(0) == std::vector<int>{0, 1, 0, 1});
  CHECK(r.stagger_coloring(1) == std::vector<int>{1, 0, 1, 0});
  Lattice r6 = Lattice::ring(6);
  CHECK(r6.stagger_coloring(2) == std::vector<int>{0, 1, 0, 1, 0, 1});
  CHECK_THROWS_AS(Lattice::ring(3).stagger_coloring(0), OddVertexCount);
  CHECK_THROWS_AS(Lattice(3, {{0, 1}, {1, 2}}).stagger_coloring(0),
                  OddVertexCount);
  // Even count but an odd cycle: triangle with a pendant vertex.
  Lattice odd_cycle(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}});
  CHECK_THROWS_AS(odd_cycle.stagger_coloring(0), NotBipartite);
  CHECK(Lattice::torus(2, 2).stagger_coloring(0) ==
        std::vector<int>{0, 1, 1, 0});
}
