#pragma once

#include "bench.hpp"
#include "buffer.hpp"
#include "errors.hpp"
#include "finite_nfa.hpp"
#include "hasnext.hpp"
#include "metrics.hpp"
#include "monitor.hpp"
#include "oplog.hpp"
#include "oracle.hpp"
#include "oracle_runs.hpp"
#include "regex.hpp"
