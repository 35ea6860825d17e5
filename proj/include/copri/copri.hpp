#pragma once

#include "copri/ast.hpp"
#include "copri/ast_printer.hpp"
#include "copri/concept_table.hpp"
#include "copri/context_stack.hpp"
#include "copri/diagnostics.hpp"
#include "copri/host.hpp"
#include "copri/interpreter.hpp"
#include "copri/lexer.hpp"
#include "copri/object_store.hpp"
#include "copri/parser.hpp"
#include "copri/refops.hpp"
#include "copri/repl.hpp"
#include "copri/token.hpp"
#include "copri/trace.hpp"
#include "copri/value.hpp"
