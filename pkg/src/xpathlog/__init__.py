"""XPathLog: Datalog-style rules over an edge-labeled XML graph."""
