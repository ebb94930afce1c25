#pragma once

#include "idpf/match/mask.hpp"
#include "idpf/match/matcher.hpp"
#include "idpf/match/oracle.hpp"
#include "idpf/match/span.hpp"
#include "idpf/term.hpp"
