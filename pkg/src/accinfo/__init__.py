"""Accessible information of quantum ensembles by steepest ascent over POVMs."""
