"""Test helpers: reference run builders."""
