"""Tests for heteronet"""
