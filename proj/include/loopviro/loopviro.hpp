#ifndef LOOPVIRO_LOOPVIRO_HPP
#define LOOPVIRO_LOOPVIRO_HPP

#include "loopviro/core.hpp"
#include "loopviro/laurent_loop.hpp"
#include "loopviro/double_loop.hpp"
#include "loopviro/projections.hpp"
#include "loopviro/birkhoff.hpp"
#include "loopviro/iwasawa.hpp"
#include "loopviro/random.hpp"
#include "loopviro/rational.hpp"
#include "loopviro/grid.hpp"
#include "loopviro/harmonic.hpp"
#include "loopviro/extended.hpp"
#include "loopviro/vector_field.hpp"
#include "loopviro/virasoro.hpp"
#include "loopviro/mobius.hpp"
#include "loopviro/io.hpp"
#include "loopviro/report.hpp"

#endif  // LOOPVIRO_LOOPVIRO_HPP
