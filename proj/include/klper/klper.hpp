#pragma once

#include "klper/agents/checkpoint.hpp"
#include "klper/agents/ddpg.hpp"
#include "klper/agents/td3.hpp"
#include "klper/envs/registry.hpp"
#include "klper/gauss.hpp"
#include "klper/harness/cli.hpp"
#include "klper/harness/config.hpp"
#include "klper/harness/metrics.hpp"
#include "klper/harness/trainer.hpp"
#include "klper/numcore/adam.hpp"
#include "klper/numcore/mlp.hpp"
#include "klper/numcore/snapshot.hpp"
#include "klper/replay/buffer.hpp"
#include "klper/replay/klper.hpp"
#include "klper/replay/per.hpp"
#include "klper/replay/sum_tree.hpp"
